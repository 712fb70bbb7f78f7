"""
Pytest suite for the command-line driver and its report files
"""
import csv
import json
import os

import pytest
from openpyxl import load_workbook

from run_sinkhorn import cmd_beurling_check, cmd_interpolate, cmd_solve, cmd_stability, cmd_sweep, main

PROBLEMS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'problems')
TWO_ATOM = os.path.join(PROBLEMS_DIR, 'two_atom_line.json')
TORUS = os.path.join(PROBLEMS_DIR, 'torus_random.json')


def read_csv(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


def write_config(tmp_path, data, name='config.json'):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestSolveCommand:
    def test_writes_artifacts(self, tmp_path):
        assert cmd_solve(TWO_ATOM, str(tmp_path)) == 0
        rows = read_csv(tmp_path / 'trace.csv')
        assert rows[0] == ['iter', 'residual_l2', 'coupling_mass', 'F1', 'F2']
        solution = json.loads((tmp_path / 'solution.json').read_text())
        assert solution['status'] == 'Converged'
        assert set(solution) >= {'f', 'g', 'a', 'b', 'status', 'iters', 'residual'}
        plan = read_csv(tmp_path / 'plan.csv')
        assert len(plan) == 2 and len(plan[0]) == 2
        total = sum(float(v) for row in plan for v in row)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_deterministic_output(self, tmp_path):
        cmd_solve(TWO_ATOM, str(tmp_path / 'a'))
        cmd_solve(TWO_ATOM, str(tmp_path / 'b'))
        for name in ('trace.csv', 'plan.csv', 'solution.json'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_single_atom(self, tmp_path):
        config = write_config(tmp_path, {
            'epsilon': 0.1,
            'mu0': {'points': [0.0], 'weights': [1.0]},
            'mu1': {'points': [0.3], 'weights': [1.0]},
        })
        assert cmd_solve(config, str(tmp_path / 'out')) == 0
        solution = json.loads((tmp_path / 'out' / 'solution.json').read_text())
        assert solution['iters'] == 1

    def test_unstable_step_exits_2(self, tmp_path):
        config = write_config(tmp_path, {'epsilon': 0.01, 'random': {'n': 50},
                                         'solver': {'h': 2.5, 'max_iter': 20000}})
        assert cmd_solve(config, str(tmp_path / 'out')) == 2
        solution = json.loads((tmp_path / 'out' / 'solution.json').read_text())
        assert solution['status'] == 'Diverged'

    def test_max_iter_flagged(self, tmp_path):
        config = write_config(tmp_path, {'epsilon': 0.01, 'random': {'n': 20},
                                         'solver': {'tol': 1e-14, 'max_iter': 5}})
        assert cmd_solve(config, str(tmp_path / 'out')) == 0
        solution = json.loads((tmp_path / 'out' / 'solution.json').read_text())
        assert solution['status'] == 'MaxIter'
        assert solution['max_iter_reached'] is True

    def test_missing_file(self, tmp_path):
        assert cmd_solve(str(tmp_path / 'nope.json'), str(tmp_path)) == 1

    def test_invalid_config(self, tmp_path):
        config = write_config(tmp_path, {
            'epsilon': 0.1,
            'mu0': {'points': [0.0], 'weights': [1.0]},
            'mu1': {'points': [0.3], 'weights': [2.0]},
        })
        assert cmd_solve(config, str(tmp_path)) == 1


class TestStabilityCommand:
    def test_scan(self, tmp_path):
        out = str(tmp_path / 'stability.csv')
        assert cmd_stability(0.01, 0.0, 2.5, 501, out) == 0
        rows = read_csv(out)
        assert rows[0] == ['h', 'radius', 'eig1_abs', 'eig2_abs']
        assert len(rows) == 502
        summary = json.loads((tmp_path / 'stability_summary.json').read_text())
        assert 1.70 <= summary['h_optimal'] <= 1.80
        assert summary['h_unstable_onset'] == pytest.approx(2.0, abs=1e-3)

    @pytest.mark.parametrize("args", [(0.01, 0.0, 2.5, 0), (0.01, 2.0, 1.0, 10)])
    def test_bad_range(self, tmp_path, args):
        assert cmd_stability(*args, str(tmp_path / 'stability.csv')) == 1


class TestSweepCommand:
    @pytest.fixture(scope="class")
    def sweep_dir(self, tmp_path_factory):
        out = tmp_path_factory.mktemp('sweep')
        config = os.path.join(PROBLEMS_DIR, 'fig1_sweep.json')
        assert cmd_sweep(config, [1.0, 1.75, 2.1], str(out)) == 0
        return out

    def test_summary(self, sweep_dir):
        rows = read_csv(sweep_dir / 'summary.csv')
        assert rows[0] == ['h', 'iters_to_tol', 'final_residual', 'status']
        by_h = {float(r[0]): r for r in rows[1:]}
        assert by_h[1.0][3] == 'Converged'
        assert by_h[1.75][3] == 'Converged'
        assert by_h[2.1][3] == 'Diverged'
        assert int(by_h[1.75][1]) < int(by_h[1.0][1])

    def test_trace_per_step_size(self, sweep_dir):
        for name in ('trace_h1.csv', 'trace_h1.75.csv', 'trace_h2.1.csv'):
            assert (sweep_dir / name).exists(), f"missing {name}"

    def test_excel_workbook(self, sweep_dir):
        wb = load_workbook(sweep_dir / 'sweep_report.xlsx')
        assert wb.sheetnames == ['Step Sizes', 'Summary']
        ws = wb['Step Sizes']
        assert ws.cell(row=1, column=4).value == 'Status'
        assert ws.max_row == 4

    def test_empty_list(self, tmp_path):
        assert cmd_sweep(TWO_ATOM, [], str(tmp_path)) == 1


class TestInterpolateAndBeurlingCommands:
    def test_interpolate(self, tmp_path):
        out = str(tmp_path / 'bridge.csv')
        assert cmd_interpolate(TWO_ATOM, [0.25, 0.5, 0.75], "-1:2:100", out) == 0
        rows = read_csv(out)
        assert rows[0] == ['t', 'x', 'rho']
        assert len(rows) == 1 + 3 * 100
        assert all(float(r[2]) > 0 for r in rows[1:])

    def test_interpolate_endpoint(self, tmp_path):
        assert cmd_interpolate(TWO_ATOM, [0.0, 0.5], None, str(tmp_path / 'bridge.csv')) == 2

    def test_interpolate_bad_grid(self, tmp_path):
        assert cmd_interpolate(TWO_ATOM, [0.5], "0:1", str(tmp_path / 'bridge.csv')) == 1

    def test_beurling_check(self, tmp_path):
        out = str(tmp_path / 'beurling.json')
        assert cmd_beurling_check(TORUS, out) == 0
        report = json.loads(open(out, encoding='utf-8').read())
        assert report['roundtrip_err'] <= 1e-8
        assert 'uniqueness_err' in report and 'log_kernel_quantity' in report


class TestMain:
    @pytest.fixture(autouse=True)
    def in_tmp(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)

    def test_stability_subcommand(self, tmp_path):
        assert main(['--out', str(tmp_path / 'out'), 'stability', '--steps', '51']) == 0
        assert (tmp_path / 'out' / 'stability.csv').exists()

    def test_solve_subcommand(self, tmp_path):
        assert main(['--config', TWO_ATOM, '--out', str(tmp_path / 'out'), 'solve']) == 0
        assert (tmp_path / 'out' / 'solution.json').exists()

    def test_sweep_list_parsing(self, tmp_path):
        assert main(['--config', TWO_ATOM, '--out', str(tmp_path / 'out'), 'sweep', '--h-list', '0.5,1']) == 0
        rows = read_csv(tmp_path / 'out' / 'summary.csv')
        assert [float(r[0]) for r in rows[1:]] == [0.5, 1.0]

    def test_no_log_file_by_default(self, tmp_path):
        assert main(['--out', str(tmp_path / 'out'), 'stability', '--steps', '11']) == 0
        assert sorted(os.listdir(tmp_path)) == ['out']

    def test_config_required(self):
        assert main(['solve']) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--html=report.html"])
