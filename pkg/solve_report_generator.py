"""
Report Generator for single Sinkhorn solves: trace.csv, solution.json, plan.csv
"""
from typing import Dict

from base_report_generator import BaseReportGenerator
from sinkhorn_core import TRACE_COLUMNS, SolveResult, SolveTrace


class SolveReportGenerator(BaseReportGenerator):

    def write_trace(self, trace: SolveTrace, filename: str = 'trace.csv') -> str:
        return self._write_csv(filename, TRACE_COLUMNS, trace.rows())

    def write_plan(self, plan, filename: str = 'plan.csv') -> str:
        return self._write_csv(filename, None, plan)

    def solution_summary(self, result: SolveResult) -> Dict:
        return {
            'f': result.potentials.f,
            'g': result.potentials.g,
            'a': result.scalings.a,
            'b': result.scalings.b,
            'status': result.status.value,
            'iters': result.iterations,
            'residual': result.residual,
            'max_iter_reached': result.status.value == 'MaxIter',
        }

    def generate_report(self, result: SolveResult, plan) -> Dict[str, str]:
        """Write the three solve artifacts and return their paths"""
        files = {
            'trace': self.write_trace(result.trace),
            'solution': self._write_json('solution.json', self.solution_summary(result)),
            'plan': self.write_plan(plan),
        }
        print(f"[REPORT] Solve artifacts written to {self.output_dir}")
        return files
