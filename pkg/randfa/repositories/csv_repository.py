"""
CSV matrices: observation tables in, scores, residuals and traces out
"""

import io
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from numpy.typing import ArrayLike

from randfa.core.exceptions import DataFormatError, DomainError
from randfa.models.data import DataMatrix
from randfa.models.fa_model import IterationTrace

from .base import BaseRepository, PathLike

logger = structlog.get_logger()

FLOAT_FORMAT = "%.17g"


class CsvRepository(BaseRepository):
    """Numeric tables with rows as observations"""

    error_type = DataFormatError
    kind = "CSV file"

    def load(
        self,
        path: PathLike,
        *,
        has_header: bool = False,
        delimiter: str = ",",
        standardize: bool = False,
        column_means: Optional[ArrayLike] = None,
        column_scales: Optional[ArrayLike] = None,
    ) -> DataMatrix:
        """Parse a rectangular numeric table and center it.

        With ``standardize`` each column is also divided by its sample
        standard deviation. Given ``column_means``/``column_scales`` the
        stored training preprocessing is applied instead.
        """
        text = self.read_text(path)
        try:
            frame = pd.read_csv(
                io.StringIO(text),
                sep=delimiter,
                header=0 if has_header else None,
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=True,
            )
        except pd.errors.EmptyDataError as e:
            raise self._fail("file is empty", path, e) from e
        except pd.errors.ParserError as e:
            # pandas reports the offending line for rows with too many fields
            raise self._fail(f"ragged rows: {e}", path, e) from e

        if frame.empty:
            raise DataFormatError(f"{path}: no data rows", {"path": str(path)})

        line_offset = 2 if has_header else 1
        short = frame.isna().any(axis=1).to_numpy()
        if short.any():
            row = int(np.flatnonzero(short)[0])
            filled = int(frame.iloc[row].notna().sum())
            raise DataFormatError(
                f"{path}: ragged rows: line {row + line_offset} has {filled} fields, expected {frame.shape[1]}",
                {"path": str(path), "line": row + line_offset},
            )

        names = [str(name).strip() for name in frame.columns] if has_header else None
        values = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors="coerce"))
        bad = ~np.isfinite(values.to_numpy(dtype=np.float64))
        if bad.any():
            row, col = (int(i) for i in np.argwhere(bad)[0])
            label = names[col] if names else f"column {col + 1}"
            raise DataFormatError(
                f"{path}: line {row + line_offset}, {label}: {frame.iat[row, col]!r} is not a finite number",
                {"path": str(path), "line": row + line_offset, "column": col + 1},
            )

        try:
            data = DataMatrix.from_array(
                values.to_numpy(dtype=np.float64),
                names,
                standardize=standardize,
                column_means=column_means,
                column_scales=column_scales,
            )
        except DomainError as e:
            e.context["path"] = str(path)
            raise
        logger.info("CSV loaded", path=str(path), n=data.n, p=data.p, standardize=standardize)
        return data

    def write_matrix(
        self,
        path: PathLike,
        matrix: ArrayLike,
        column_names: Optional[Sequence[str]] = None,
        delimiter: str = ",",
    ) -> Path:
        frame = pd.DataFrame(np.asarray(matrix, dtype=np.float64), columns=column_names)
        text = frame.to_csv(
            sep=delimiter,
            index=False,
            header=column_names is not None,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
        )
        return self.write_text(path, text)

    def write_trace(self, path: PathLike, trace: IterationTrace) -> Path:
        text = trace.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self.write_text(path, text)


csv_repository = CsvRepository()


def load_csv(
    path: PathLike,
    *,
    has_header: bool = False,
    delimiter: str = ",",
    standardize: bool = False,
    column_means: Optional[ArrayLike] = None,
    column_scales: Optional[ArrayLike] = None,
) -> DataMatrix:
    return csv_repository.load(
        path,
        has_header=has_header,
        delimiter=delimiter,
        standardize=standardize,
        column_means=column_means,
        column_scales=column_scales,
    )


def write_matrix_csv(
    path: PathLike,
    matrix: ArrayLike,
    column_names: Optional[Sequence[str]] = None,
    delimiter: str = ",",
) -> Path:
    return csv_repository.write_matrix(path, matrix, column_names, delimiter)


def write_trace_csv(path: PathLike, trace: IterationTrace) -> Path:
    return csv_repository.write_trace(path, trace)
