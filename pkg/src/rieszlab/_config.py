import os

ENV_THREADS = "RIESZLAB_THREADS"
ENV_ATOM_CAP = "RIESZLAB_ATOM_CAP"
ENV_EXACT_CAP = "RIESZLAB_EXACT_CAP"

DEFAULT_ATOM_CAP = 1 << 20
DEFAULT_EXACT_CAP = 500


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        from .errors import ValidationError
        raise ValidationError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        from .errors import ValidationError
        raise ValidationError(f"{name} must be >= 1, got {value}")
    return value


def threads(value=None):
    if value is not None:
        return max(1, int(value))
    return _env_int(ENV_THREADS, 1)


def atom_cap(value=None):
    return int(value) if value is not None else _env_int(ENV_ATOM_CAP, DEFAULT_ATOM_CAP)


def exact_cap(value=None):
    return int(value) if value is not None else _env_int(ENV_EXACT_CAP, DEFAULT_EXACT_CAP)
