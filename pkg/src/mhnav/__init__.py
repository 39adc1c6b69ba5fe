"""mhnav: a desk-scale closed-loop mental-health navigation engine.

Sensing streams flow through a gateway (ingest) into a personal chronicle of
daily-life events, a physiological marker pipeline and a subjective stream;
an estimator places each day in a multi-dimensional mental-health state
space; a navigator plans intervention routes toward consensus goals; a
service layer closes the loop for the provider.
"""

__version__ = "0.1.0"
