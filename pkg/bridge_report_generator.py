"""
Report Generator for entropic interpolation: one CSV row per (t, grid point)
"""
from interpolation import BridgeDensity
from base_report_generator import BaseReportGenerator


class BridgeReportGenerator(BaseReportGenerator):

    def generate_report(self, bridge: BridgeDensity, filename: str = 'bridge.csv') -> str:
        coords = ('x',) if bridge.grid.dim == 1 else ('x', 'y')
        path = self._write_csv(filename, ('t', *coords, 'rho'), bridge.rows())
        print(f"[REPORT] Bridge density: {path}")
        return path
