"""
CSV serialization of grid functions

Layout:
    # n, topology, points_per_axis, h
    # 1, box, 1024, 0.0078125
    one value per line in C order
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import InvalidArgumentError
from src.models import Topology, Units
from .spec import GridFunction, GridSpec

logger = logging.getLogger(__name__)

HEADER_FIELDS = "n, topology, points_per_axis, h"


def write_grid_function(f: GridFunction, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = f.spec
    meta = f"{spec.n}, {spec.topology.value}, {spec.points_per_axis}, {spec.h!r}"
    np.savetxt(path, f.values.reshape(-1), fmt="%.17g", header=f"{HEADER_FIELDS}\n{meta}", comments="# ")
    logger.debug(f"wrote grid function to {path}")
    return path


def read_grid_function(path: Union[str, Path], units: Units = Units.HEIGHT) -> GridFunction:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
        second = f.readline().strip()
    if first.lstrip("# ").strip() != HEADER_FIELDS:
        raise InvalidArgumentError(f"{path} is not a grid function file")
    try:
        n_raw, topology_raw, m_raw, h_raw = [part.strip() for part in second.lstrip("# ").split(",")]
        n, m, h = int(n_raw), int(m_raw), float(h_raw)
        topology = Topology(topology_raw)
    except ValueError as e:
        raise InvalidArgumentError(f"malformed grid header in {path}: {second}") from e

    if topology == Topology.TORUS:
        spec = GridSpec.torus(n, m, period=h * m)
    else:
        spec = GridSpec.box(n, m, L=h * m / 2.0)
    values = np.loadtxt(path, comments="#", ndmin=1)
    return GridFunction(spec, values, units)
