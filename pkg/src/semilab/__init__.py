"""semilab: a numerical laboratory for Markov semigroup kernels.

Modules
-------
specfun    scalar special functions with controlled accuracy
discrete   M/M/infinity queue: exact transition law, log-Laplacian bounds,
           sup-semigroup tails, hypercube supremum
diffusion  Ornstein-Uhlenbeck semigroup, exact bridges, Feynman-Kac
           estimators of log-gradient / log-Hessian, h-transform
deviation  deviation-bound engine: Legendre machinery, continuous and
           Poisson tail bounds, counterexample families
laguerre   Laguerre kernels on (0, inf), closed-form log-Hessian at
           alpha = 3/2, Gamma-measure experiments
harness    declarative experiment runner and CLI
"""

__version__ = "0.1.0"
