"""Integration, discrete events, single runs, ensembles and sweeps."""
