"""
Report Generator for the product-measure checks
"""
from typing import Dict

from base_report_generator import BaseReportGenerator


class BeurlingReportGenerator(BaseReportGenerator):

    def generate_report(self, results: Dict, filename: str = 'beurling.json') -> str:
        path = self._write_json(filename, results)
        print(f"[REPORT] Product-measure report: {path}")
        return path
