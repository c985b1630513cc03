"""
SAR image formation: the shifted 2-D inverse DFT pipeline.

Serial form::

    S = transpose(abs(fftshift2(ifft_cols(ifft_rows(fftshift2(F))))))

The first inverse transform runs down each column (axis 0), which is the
fully local dimension of a column-distributed matrix; the second runs
along each row (axis 1) after ``transpose_grid`` has made rows local.
Each 1-D inverse transform carries its own 1/N normalization.
"""

from typing import Optional

import numpy as np
import structlog
from scipy import fft

from ..distribution.darray import agg, dscatter, dzeros, local_part, put_local, transpose_grid
from ..distribution.dist_map import DistDim, DistMap
from ..models.configs import SarConfig
from ..transport.codec import ElemKind
from ..transport.context import WorkerCtx

logger = structlog.get_logger(__name__)


def fftshift2(matrix: np.ndarray) -> np.ndarray:
    """Circularly shift both axes by floor(extent / 2)."""

    return fft.fftshift(matrix, axes=(0, 1))


def make_phase_history(cfg: SarConfig) -> np.ndarray:
    """Deterministic complex input F of shape (n_rows, n_cols)."""

    rng = np.random.default_rng(cfg.seed)
    shape = (cfg.n_rows, cfg.n_cols)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def form_image_serial(F: np.ndarray, cfg: Optional[SarConfig] = None) -> np.ndarray:
    """Image of shape (n_cols, n_rows) from phase history F of shape (n_rows, n_cols)."""

    F = np.asarray(F, dtype=np.complex128)
    if cfg is not None and F.shape != (cfg.n_rows, cfg.n_cols):
        raise ValueError(f"F has shape {F.shape}, config expects {(cfg.n_rows, cfg.n_cols)}")

    spatial = fft.ifft(fftshift2(F), axis=0)
    spatial = fft.ifft(spatial, axis=1)
    return np.ascontiguousarray(np.abs(fftshift2(spatial)).T)


def form_image_parallel(ctx: WorkerCtx, cfg: SarConfig) -> Optional[np.ndarray]:
    """Distributed pipeline; the image is returned on rank 0, ``None`` elsewhere.

    Rank 0 generates and pre-shifts F, then scatters column blocks. The
    post-shift is applied at rank 0 after aggregation, which is
    equivalent since abs is elementwise.
    """

    shape = (cfg.n_rows, cfg.n_cols)
    column_map = DistMap.for_world(ctx.world_size, DistDim.COLS)

    shifted = fftshift2(make_phase_history(cfg)) if ctx.is_root else None
    pF = dscatter(ctx, shape, ElemKind.C128, column_map, matrix=shifted)

    put_local(pF, fft.ifft(local_part(pF), axis=0))
    Z = transpose_grid(ctx, pF)

    image = dzeros(ctx, shape, ElemKind.F64, Z.map)
    put_local(image, np.abs(fft.ifft(local_part(Z), axis=1)))

    full = agg(ctx, image)
    if full is None:
        return None
    logger.debug("image formed", world_size=ctx.world_size, shape=shape)
    return np.ascontiguousarray(fftshift2(full).T)


def _inverse_dft_matrix(n: int) -> np.ndarray:
    # Reduce j*k mod n before scaling so phases stay small and exact.
    exponents = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(2j * np.pi * exponents / n)


def direct_inverse_dft2(F: np.ndarray) -> np.ndarray:
    """2-D inverse DFT by direct summation, normalized by 1/(n*m)."""

    F = np.asarray(F, dtype=np.complex128)
    n, m = F.shape
    return _inverse_dft_matrix(n) @ F @ _inverse_dft_matrix(m).T / (n * m)


def form_image_reference(F: np.ndarray) -> np.ndarray:
    """The serial pipeline computed with the direct-summation DFT."""

    return np.ascontiguousarray(np.abs(fftshift2(direct_inverse_dft2(fftshift2(F)))).T)
