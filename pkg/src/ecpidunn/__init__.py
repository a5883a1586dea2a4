"""Closed-loop simulation of an error-centric PID controller whose gains are
rescheduled every tick by an untrained, fixed-seed neural network."""

__version__ = "0.1.0"
