"""Compartment dynamics and time-dependent inputs."""
