"""
Report Generator for stability scans: stability.csv and a JSON summary
"""
import os
from typing import Dict

from base_report_generator import BaseReportGenerator
from stability import StabilityReport

STABILITY_COLUMNS = ('h', 'radius', 'eig1_abs', 'eig2_abs')


class StabilityReportGenerator(BaseReportGenerator):

    def generate_report(self, report: StabilityReport, filename: str = 'stability.csv') -> Dict[str, str]:
        csv_path = self._write_csv(filename, STABILITY_COLUMNS, report.rows())
        stem = os.path.splitext(filename)[0]
        summary = report.summary()
        summary['notes'] = report.notes
        json_path = self._write_json(f'{stem}_summary.json', summary)
        print(f"[REPORT] Stability scan: {csv_path}")
        print(f"[REPORT] Summary: {json_path}")
        return {'csv': csv_path, 'summary': json_path}
