"""
Base Report Generator with common functionality
"""
import csv
import json
import os
from typing import Dict, Iterable, Sequence

import numpy as np

from config import Config


class BaseReportGenerator:
    """Base class for all report generators: output directory, number formatting, CSV/JSON writers"""

    def __init__(self, output_dir: str = None):
        self.output_dir = output_dir or Config.OUTPUT_DIR
        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)

    def _path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def _format_number(self, value) -> str:
        """Fixed 17 significant digits so reruns are byte-identical (e.g. 0.1 -> '0.10000000000000001')"""
        if isinstance(value, (bool, np.bool_)):
            return str(bool(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return format(float(value), f'.{Config.CSV_SIGNIFICANT_DIGITS}g')
        return str(value)

    def _jsonable(self, value):
        if isinstance(value, dict):
            return {k: self._jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self._jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return [self._jsonable(v) for v in value.tolist()]
        if isinstance(value, (np.floating, float)):
            value = float(value)
            return value if np.isfinite(value) else None
        if isinstance(value, np.integer):
            return int(value)
        if hasattr(value, 'value') and isinstance(getattr(value, 'value'), str):
            return value.value
        return value

    def _write_csv(self, filename: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
        path = self._path(filename)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            if header:
                writer.writerow(header)
            for row in rows:
                writer.writerow([self._format_number(v) for v in row])
        return path

    def _write_json(self, filename: str, data: Dict) -> str:
        path = self._path(filename)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self._jsonable(data), f, indent=2, ensure_ascii=False)
            f.write('\n')
        return path
