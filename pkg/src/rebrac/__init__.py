"""ReBRAC: behavior-regularized actor-critic for offline RL, with toy
environments, offline-dataset tooling, ablation utilities and evaluation
statistics."""

__version__ = "0.1.0"
