import re
import base64
import numpy as np
from src.lattice.geometry import BoxRegion, Configuration
from src.utils.errors import DomainError

HEADER_PATTERN = re.compile(r"^dims:\s*(?P<dims>[-\d\s]*),\s*offset:\s*(?P<offset>[-\d\s]*)$")


def dumps(config: Configuration) -> str:
    """
    Serializes a configuration to the compact text format: a header line
    "dims: s_1 ... s_d, offset: o_1 ... o_d" followed by the base64 encoded
    bit field (index order, bits packed little-endian)
    ---
    Args:
        config (Configuration): configuration to serialize
    Returns:
        str: two-line text representation
    """
    region = config.region
    header = "dims: {}, offset: {}".format(
        " ".join(str(s) for s in region.sides),
        " ".join(str(o) for o in region.offset),
    )
    packed = np.packbits(config.occupied.astype(np.uint8), bitorder="little")
    return header + "\n" + base64.b64encode(packed.tobytes()).decode("ascii") + "\n"


def loads(text: str) -> Configuration:
    """
    Parses the compact text format back into a configuration
    """
    lines = [line.strip() for line in text.strip().splitlines()]
    if len(lines) != 2:
        raise DomainError(f"expected a header line and a payload line, got {len(lines)} lines")
    match = HEADER_PATTERN.match(lines[0])
    if match is None:
        raise DomainError(f"malformed configuration header: {lines[0]!r}")
    sides = tuple(int(s) for s in match["dims"].split())
    offset = tuple(int(o) for o in match["offset"].split())
    region = BoxRegion(offset=offset, sides=sides)
    try:
        payload = base64.b64decode(lines[1], validate=True)
    except ValueError as e:
        raise DomainError("payload is not valid base64") from e
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
    if bits.size < region.volume:
        raise DomainError(f"payload holds {bits.size} bits, region needs {region.volume}")
    return Configuration(region, bits[: region.volume].astype(bool))


def ascii_grid(config: Configuration, occupied: str = "#", empty: str = ".") -> str:
    """
    Human readable dump for d <= 2: one text row per axis-1 coordinate, axis 0
    running left to right, highest axis-1 coordinate on top
    """
    region = config.region
    if region.dim > 2:
        raise DomainError(f"ascii dump supports d <= 2, got d = {region.dim}")
    grid = np.atleast_2d(config.grid.reshape(region.sides + (1,) * (2 - region.dim), order="F"))
    rows = []
    for y in reversed(range(grid.shape[1])):
        rows.append("".join(occupied if cell else empty for cell in grid[:, y]))
    return "\n".join(rows)
