"""Exception hierarchy shared by the emrc modules."""

from __future__ import annotations


class EMRCError(Exception):
    """Base class for every error raised by this package."""


class ParseError(EMRCError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class AsymmetricLink(ParseError):
    """A directed link has no reverse partner and mirroring is disabled."""


class UnknownNode(EMRCError):
    pass


class NotBiconnected(EMRCError):
    pass


class InsufficientConfigurations(EMRCError):
    """Some component could not be isolated in any of the ``n`` configurations."""

    def __init__(self, n: int, component: str):
        self.n = n
        self.component = component
        super().__init__(f"cannot isolate {component} with n={n} backup configurations")


class DisconnectedBackbone(EMRCError):
    pass


class Unreachable(EMRCError):
    pass


class NoRoute(EMRCError):
    pass


class ZeroWeightOriginal(EMRCError):
    pass


class NoBackupConfig(EMRCError):
    pass


class ScenarioError(EMRCError):
    pass


class UnknownComponent(ScenarioError):
    pass
