"""
Convergence-trace figures.

matplotlib is an optional extra; without it the figures are skipped and
only the trace CSV is written.
"""

from pathlib import Path
from typing import List, Optional, Union

import structlog

from randfa.core.config import settings
from randfa.models.fa_model import IterationTrace

logger = structlog.get_logger(__name__)


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        return None
    matplotlib.use("Agg")
    # fixed element ids in SVG output
    matplotlib.rcParams["svg.hashsalt"] = settings.APP_NAME
    from matplotlib import pyplot as plt

    return plt


def _save(plt, figure, path: Path) -> None:
    # no creation date in the file, so identical traces give identical plots
    metadata = {"Date": None} if path.suffix == ".svg" else {"CreationDate": None}
    figure.savefig(path, format=path.suffix.lstrip("."), metadata=metadata)
    plt.close(figure)


def emit_convergence_plots(
    trace: IterationTrace,
    prefix: Union[str, Path],
    k: int,
    p: int,
    plot_format: Optional[str] = None,
) -> List[Path]:
    """Write the tail-sum and minimum-uniqueness figures for one fit.

    The first figure shows tr(D_2^2)/(n-1) + k against the iteration with p
    as the target line; the second shows min psi2. Returns the written
    paths, empty when no plotting backend is installed.
    """
    plt = _pyplot()
    if plt is None:
        logger.warning("matplotlib is not installed; skipping convergence plots", prefix=str(prefix))
        return []
    if not len(trace):
        logger.warning("Empty trace; skipping convergence plots", prefix=str(prefix))
        return []

    suffix = plot_format or settings.PLOT_FORMAT
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    iterations = trace.column("iter")
    written: List[Path] = []

    figure, axis = plt.subplots(figsize=(6, 4))
    axis.plot(iterations, trace.column("tail_sum_over_nminus1") + k, marker="o")
    axis.axhline(p, color="grey", linestyle="--", label=f"p = {p}")
    axis.set_xlabel("iteration")
    axis.set_ylabel("tail sum / (n-1) + k")
    axis.set_title(f"Tail eigenvalue sum, k = {k}")
    axis.legend()
    path = prefix.parent / f"{prefix.name}_tail_sum.{suffix}"
    _save(plt, figure, path)
    written.append(path)

    figure, axis = plt.subplots(figsize=(6, 4))
    axis.plot(iterations, trace.column("min_psi2"), marker="o")
    axis.set_xlabel("iteration")
    axis.set_ylabel("min psi2")
    axis.set_title(f"Smallest unique variance, k = {k}")
    path = prefix.parent / f"{prefix.name}_min_psi2.{suffix}"
    _save(plt, figure, path)
    written.append(path)

    logger.info("Convergence plots written", paths=[str(item) for item in written])
    return written
