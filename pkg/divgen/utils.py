import csv
import io
import logging
import os
import tempfile
import zlib
from collections.abc import Iterable, Mapping, Sequence
from enum import IntEnum
from pathlib import Path

import coloredlogs
import numpy as np

# Set up logging
logger = logging.getLogger('divgen')
handler = logging.StreamHandler()
handler.setFormatter(
    coloredlogs.ColoredFormatter(
        fmt='%(asctime)s :: %(levelname)s :: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
    )
)
logger.addHandler(handler)
_level = getattr(logging, os.environ.get('DIVGEN_LOG', 'INFO').upper(), logging.INFO)
logger.setLevel(_level if isinstance(_level, int) else logging.INFO)
logger.propagate = False


def log_debug(*args, **kwargs):
    """Log an debug message."""
    logger.debug(*args, **kwargs)


def log_info(*args, **kwargs):
    """Log an info message."""
    logger.info(*args, **kwargs)


def log_warning(*args, **kwargs):
    """Log a warning message."""
    logger.warning(*args, **kwargs)


def log_error(*args, **kwargs):
    """Log an error message."""
    logger.error(*args, **kwargs)


class Role(IntEnum):
    """Purpose of a random draw, part of every sub-stream key."""

    INIT = 0
    FRESH = 1
    PAIRING = 2
    MODEL = 3


def sub_stream(seed: int, generation: int, role: Role, index: int = 0) -> np.random.Generator:
    """Independent generator keyed by (seed, generation, role, index)."""
    sequence = np.random.SeedSequence(seed, spawn_key=(generation, int(role), index))
    return np.random.default_rng(sequence)


def derive_seed(base_seed: int, *keys: int | str) -> int:
    """Stable 32-bit seed from a base seed and a mix of int/str keys."""
    entropy = [base_seed]
    for key in keys:
        entropy.append(zlib.crc32(key.encode('utf-8')) if isinstance(key, str) else int(key))
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def atomic_write_text(path: Path, text: str):
    """Write to a sibling temp file and rename, so readers never see partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def format_csv(fieldnames: Sequence[str], rows: Iterable[Mapping]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[Mapping]):
    atomic_write_text(path, format_csv(fieldnames, rows))


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))
