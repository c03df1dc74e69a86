"""
Reading and writing the .volhdr/.volraw container format
"""
import json
import logging
from pathlib import Path
from typing import Tuple

import numpy as np

from core.exceptions import VolumeFormatError
from .containers import Volume, Mask
from .schemas import VolumeHeader, validate_header

logger = logging.getLogger(__name__)

HEADER_SUFFIX = '.volhdr'
PAYLOAD_SUFFIX = '.volraw'


def container_paths(path) -> Tuple[Path, Path]:
    """Header and payload paths for a container given its stem or either file"""
    path = Path(path)
    if path.suffix in (HEADER_SUFFIX, PAYLOAD_SUFFIX):
        path = path.with_suffix('')
    return (path.with_name(path.name + HEADER_SUFFIX),
            path.with_name(path.name + PAYLOAD_SUFFIX))


def read_container(path) -> Tuple[VolumeHeader, np.ndarray]:
    """
    Read a container into an array indexed [x, y, z] or [x, y, z, channel].

    Raises:
        VolumeFormatError: malformed header or payload size mismatch
    """
    header_path, payload_path = container_paths(path)
    try:
        raw_header = json.loads(header_path.read_text())
    except OSError as e:
        raise VolumeFormatError(f"Cannot read header {header_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise VolumeFormatError(f"Malformed header {header_path}: {e}") from e
    if not isinstance(raw_header, dict):
        raise VolumeFormatError(f"Malformed header {header_path}: expected an object")

    is_valid, header, error_msg = validate_header(raw_header)
    if not is_valid:
        raise VolumeFormatError(f"Malformed header {header_path}: {error_msg}")

    try:
        payload = np.fromfile(payload_path, dtype=header.numpy_dtype)
    except OSError as e:
        raise VolumeFormatError(f"Cannot read payload {payload_path}: {e}") from e

    expected = header.voxel_count * header.channels
    if payload.size != expected:
        raise VolumeFormatError(
            f"Payload {payload_path} holds {payload.size} values, header declares {expected}"
        )

    nx, ny, nz = header.dims
    if header.channels == 1:
        array = payload.reshape((nx, ny, nz), order='F')
    else:
        # channel is the innermost axis: (c, x, y, z) in Fortran order
        array = np.moveaxis(payload.reshape((header.channels, nx, ny, nz), order='F'), 0, -1)
    logger.debug(f"Read {header_path.name}: dims={header.dims} channels={header.channels}")
    return header, array


def write_container(array: np.ndarray, spacing, path, dtype: str) -> None:
    """Write an [x, y, z] or [x, y, z, channel] array as a container"""
    array = np.asarray(array)
    channels = 1 if array.ndim == 3 else array.shape[-1]
    header = VolumeHeader(
        dims=list(array.shape[:3]),
        spacing=[float(s) for s in spacing],
        dtype=dtype,
        channels=channels,
    )
    header_path, payload_path = container_paths(path)
    header_path.parent.mkdir(parents=True, exist_ok=True)

    if channels == 1:
        flat = array.ravel(order='F')
    else:
        flat = np.moveaxis(array, -1, 0).ravel(order='F')
    flat.astype(header.numpy_dtype).tofile(payload_path)
    header_path.write_text(header.model_dump_json(indent=2) + "\n")


def load_volume(path) -> Volume:
    """Load a single-channel scalar volume as 64-bit floats"""
    header, array = read_container(path)
    if header.channels != 1:
        raise VolumeFormatError(f"{path} has {header.channels} channels, expected a scalar volume")
    return Volume(array.astype(np.float64), tuple(header.spacing))


def load_mask(path) -> Mask:
    """Load a u8 mask with values in {0, 1}"""
    header, array = read_container(path)
    if header.dtype != 'u8' or header.channels != 1:
        raise VolumeFormatError(f"{path} is not a u8 single-channel mask")
    if np.any(array > 1):
        raise VolumeFormatError(f"{path} holds values other than 0 and 1")
    return Mask(array.astype(bool), tuple(header.spacing))


def write_volume(vol: Volume, path, dtype: str = 'f64') -> None:
    write_container(vol.data, vol.spacing, path, dtype)


def write_mask(mask: Mask, path) -> None:
    write_container(mask.data.astype(np.uint8), mask.spacing, path, 'u8')


def write_labels(labels: np.ndarray, spacing, path) -> None:
    """Write an integer label map (values 0..255) in mask format"""
    labels = np.asarray(labels)
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 255:
        raise VolumeFormatError("label values must fit in u8")
    write_container(labels.astype(np.uint8), spacing, path, 'u8')
