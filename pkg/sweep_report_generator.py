"""
Report Generator for step-size sweeps: per-h traces, summary.csv and an Excel workbook
"""
from typing import Dict, List

from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill

from base_report_generator import BaseReportGenerator
from sinkhorn_core import TRACE_COLUMNS

SUMMARY_COLUMNS = ('h', 'iters_to_tol', 'final_residual', 'status')

HEADER_FILL = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
DIVERGED_FILL = PatternFill(start_color="F8D7DA", end_color="F8D7DA", fill_type="solid")
MAX_ITER_FILL = PatternFill(start_color="FFF3CD", end_color="FFF3CD", fill_type="solid")


class SweepReportGenerator(BaseReportGenerator):

    def trace_filename(self, h: float) -> str:
        return f"trace_h{h:g}.csv"

    def write_trace(self, h: float, result) -> str:
        return self._write_csv(self.trace_filename(h), TRACE_COLUMNS, result.trace.rows())

    def summary_rows(self, runs: List[Dict]) -> List[tuple]:
        return [(run['h'], run['iters'], run['residual'], run['status']) for run in runs]

    def generate_report(self, runs: List[Dict], problem_info: Dict = None) -> Dict[str, str]:
        """runs: dicts with keys h, iters, residual, status, result"""
        for run in runs:
            self.write_trace(run['h'], run['result'])
        files = {
            'summary': self._write_csv('summary.csv', SUMMARY_COLUMNS, self.summary_rows(runs)),
            'excel': self.generate_excel_report(runs, problem_info or {}),
        }
        print(f"[REPORT] Sweep summary: {files['summary']}")
        print(f"[SUCCESS] Excel report saved: {files['excel']}")
        return files

    def generate_excel_report(self, runs: List[Dict], problem_info: Dict) -> str:
        filename = self._path('sweep_report.xlsx')

        wb = Workbook()
        ws = wb.active
        ws.title = "Step Sizes"

        # Header row
        headers = ["h", "Iterations", "Final Residual", "Status"]
        for col, name in enumerate(headers, start=1):
            c = ws.cell(row=1, column=col, value=name)
            c.font = Font(bold=True, color="FFFFFF")
            c.fill = HEADER_FILL

        row = 2
        for run in runs:
            ws.cell(row=row, column=1, value=float(run['h']))
            ws.cell(row=row, column=2, value=int(run['iters']))
            residual = float(run['residual'])
            ws.cell(row=row, column=3, value=residual if residual == residual else "NaN")
            ws.cell(row=row, column=4, value=run['status'])

            # Highlight runs that did not converge
            fill = {'Diverged': DIVERGED_FILL, 'MaxIter': MAX_ITER_FILL}.get(run['status'])
            if fill is not None:
                for col in range(1, len(headers) + 1):
                    ws.cell(row=row, column=col).fill = fill
            row += 1

        for letter, width in zip("ABCD", [10, 12, 22, 12]):
            ws.column_dimensions[letter].width = width

        # Summary sheet
        ws2 = wb.create_sheet("Summary", 1)
        ws2["A1"] = "STEP-SIZE SWEEP"
        ws2["A1"].font = Font(bold=True, size=16, color="366092")
        ws2.merge_cells('A1:C1')

        converged = [r for r in runs if r['status'] == 'Converged']
        fastest = min(converged, key=lambda r: r['iters']) if converged else None
        entries = [(key, value) for key, value in problem_info.items()]
        entries += [
            ("Runs:", len(runs)),
            ("Converged:", len(converged)),
            ("Diverged:", sum(1 for r in runs if r['status'] == 'Diverged')),
            ("Fastest h:", float(fastest['h']) if fastest else "n/a"),
        ]
        row = 3
        for label, value in entries:
            ws2.cell(row=row, column=1, value=label).font = Font(bold=True)
            ws2.cell(row=row, column=2, value=value)
            row += 1
        ws2.column_dimensions['A'].width = 25
        ws2.column_dimensions['B'].width = 15

        wb.save(filename)
        return filename
