"""opuclab: orthogonal polynomials on the unit circle and their asymptotics."""

__version__ = "0.1.0"
