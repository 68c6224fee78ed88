"""Exact combinatorics of the Bruhat-Tits building of PGL_{d+1}(Q_p):
lattice classes, hyperplane arrangements, Orlik-Solomon coefficient systems
and their Cech cohomology."""

__version__ = "0.1.0"
SCHEMA = "btcoh/1"
