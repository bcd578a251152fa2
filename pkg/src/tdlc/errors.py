"""Shared exception types.

GuardExceeded signals that an enumeration would overrun its feasibility cap;
CertificationError signals that the truncation radius is too small to certify
a claim.  Both map to exit code 2 at the CLI, while plain ValueError (bad
input) maps to exit code 1.
"""


class GuardExceeded(RuntimeError):
    """An enumeration hit its configured size cap."""


class CertificationError(RuntimeError):
    """The available ball depth cannot certify the requested claim."""


DEFAULT_GUARD = 10**6


def check_guard(count: int, guard: int | None, what: str) -> None:
    cap = DEFAULT_GUARD if guard is None else guard
    if count > cap:
        raise GuardExceeded(f"{what}: {count} objects exceeds guard {cap}")
