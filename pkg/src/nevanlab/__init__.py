"""Numerical laboratory for Nevanlinna characteristics, growth indicators and
zero distribution of solutions of ``f'' + A f' + B f = 0``."""

__version__ = "0.1.0"
