"""Exceptions raised by the protocol simulation."""


class TrapState(ValueError):
    """The |0> amplitude of a dressed state vanished, so x cannot be recovered."""


class ZeroBranch(ValueError):
    """A post-selection targeted a branch with (numerically) zero weight."""
