# netnl/services/report_generation.py
"""
Report Export Service.

Writes report tables (pandas DataFrames) into one Excel workbook, one sheet
per table, with bold headers and bounded column widths.
"""

import logging
import math
import os
import shutil
from typing import Mapping

import openpyxl
import pandas as pd
from openpyxl.styles import Font
from openpyxl.utils import get_column_letter

from ..core.exceptions import ReportExportError

logger = logging.getLogger(__name__)

_HEADER_FONT = Font(bold=True)


def _cell_value(value):
    """Plain Python scalars for openpyxl; NaN and None become empty cells."""
    if value is None:
        return None
    if isinstance(value, complex):
        return str(value)
    if hasattr(value, 'item'):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, (list, tuple, dict)):
        return str(value)
    return value


def export_workbook(sheets: Mapping[str, pd.DataFrame], path: str) -> str:
    """
    Saves every non-empty frame in `sheets` to its own worksheet.

    Uses a temporary file and a move so a failed export leaves no partial
    workbook.

    Raises:
        ReportExportError: if nothing can be written or saving fails.
    """
    frames = {name: frame for name, frame in sheets.items() if frame is not None and not frame.empty}
    if not frames:
        raise ReportExportError("No report tables to export.", filename=path)

    temp_path = f"{path}.{os.getpid()}.tmp"
    current_sheet = None
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        wb = openpyxl.Workbook()
        wb.remove(wb.active)
        for name, frame in frames.items():
            current_sheet = name
            ws = wb.create_sheet(title=name[:30])
            headers = [str(c) for c in frame.columns]
            for col_idx, header in enumerate(headers, 1):
                cell = ws.cell(row=1, column=col_idx)
                cell.value = header
                cell.font = _HEADER_FONT
            for row_idx, row in enumerate(frame.itertuples(index=False), 2):
                for col_idx, value in enumerate(row, 1):
                    ws.cell(row=row_idx, column=col_idx).value = _cell_value(value)
            for col_idx, header in enumerate(headers, 1):
                max_len = max([len(str(v)) for v in frame.iloc[:, col_idx - 1]] + [len(header)])
                ws.column_dimensions[get_column_letter(col_idx)].width = min(max(max_len + 2, 12), 50)
        current_sheet = None
        wb.save(temp_path)
        shutil.move(temp_path, path)
    except Exception as e:
        logger.error(f"Failed to export workbook {path}: {e}", exc_info=True)
        if os.path.exists(temp_path):
            try:
                os.remove(temp_path)
            except OSError:
                pass
        raise ReportExportError(f"Could not export workbook: {e}", filename=path,
                                sheet_name=current_sheet) from e

    logger.info(f"Workbook exported with {len(frames)} sheet(s): {path}")
    return path
