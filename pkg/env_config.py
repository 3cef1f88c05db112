"""Environment and config-file loading.

Importing this module loads ``.env`` from the working directory so that
``CASIMIR_*`` variables reach :mod:`config.settings`. Run configurations for
the command line are flat ``key=value`` files read with the same parser.
"""

from __future__ import annotations

import logging
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

log = logging.getLogger(__name__)

load_dotenv()


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat key-value run configuration.

    Keys are matched case-insensitively against command-line option names
    (``R1``, ``theta2``, ``tol``...). Empty values are dropped so that the
    command-line default applies.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values = dotenv_values(path)
    cleaned = {
        key.strip().lower().replace("-", "_"): value.strip()
        for key, value in values.items()
        if value is not None and value.strip()
    }
    log.debug("Loaded %d keys from %s", len(cleaned), path)
    return cleaned
