"""Device-to-system performance evaluation toolkit.

Models transistors (virtual-source compact model) and interconnects
(size-dependent resistivity, per-layer RC), characterizes a parametric
standard-cell library with an internal transient engine, runs a simplified
physical-design flow (placement, route estimation, buffering/sizing, STA),
sweeps technology parameters to Pareto-optimal energy-frequency curves, and
trains a small neural network that predicts core energy/area from 41
technology features.
"""

__version__ = "0.1.0"
