import os

import pytest

from magvlasov.tools import cli
from magvlasov.utils import read_manifest

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')
MINIMAL = os.path.join(CONFIGS, 'minimal.ini')


def _main(tmp_path, *args):
    out = str(tmp_path / 'out')
    return cli.main(list(args) + ['--config', MINIMAL, '--out', out, '-q']), out


def test_simulate(tmp_path):
    status, out = _main(tmp_path, 'simulate', '--set', 'diagnostics.snapshot_times=(pi/4,)')
    assert status == cli.EXIT_OK
    for name in ('config.ini', 'series.csv', 'report.txt', 'summary.csv', 'manifest.txt'):
        assert os.path.exists(os.path.join(out, name)), name
    manifest = read_manifest(os.path.join(out, 'manifest.txt'))
    assert 'series.csv' in manifest
    assert any(name.startswith('snapshots/') for name in manifest)
    with open(os.path.join(out, 'summary.csv')) as f:
        assert f.readline().strip() == 'name,samples,max_ratio,fitted_C,pass'


def test_echoed_config_reproduces_the_run(tmp_path):
    status, out = _main(tmp_path, 'simulate', '--seed', '3')
    assert status == cli.EXIT_OK
    again = str(tmp_path / 'again')
    assert cli.main(['simulate', '--config', os.path.join(out, 'config.ini'), '--out', again, '-q']) == 0
    with open(os.path.join(out, 'series.csv')) as a, open(os.path.join(again, 'series.csv')) as b:
        assert a.read() == b.read()


def test_bad_config_is_a_usage_error(tmp_path):
    path = tmp_path / 'bad.ini'
    path.write_text('[run]\nbogus = 1\n')
    assert cli.main(['simulate', '--config', str(path), '--out', str(tmp_path / 'out'), '-q']) == cli.EXIT_USAGE
    status, _out = _main(tmp_path, 'simulate', '--set', 'run.n=0')
    assert status == cli.EXIT_USAGE
    for bad in ('harness.k=2', 'harness.d_grid=(1.5,)'):
        status, _out = _main(tmp_path, 'verify-inequalities', '--set', bad)
        assert status == cli.EXIT_USAGE, bad


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        cli.main(['frobnicate'])
    assert info.value.code == 2


def test_scan_singularity(tmp_path):
    status, out = _main(tmp_path, 'scan-singularity')
    assert status == cli.EXIT_OK
    assert os.path.exists(os.path.join(out, 'scan.csv'))
    status, _out = _main(tmp_path, 'scan-singularity', '--set', 'mag.omega=0')
    assert status == cli.EXIT_USAGE


def test_density_rejects_two_stream(tmp_path):
    status, _out = _main(tmp_path, 'verify-density', '--set', 'distribution.family=two-stream')
    assert status == cli.EXIT_USAGE


def test_failed_check_exits_1(tmp_path):
    status, out = _main(tmp_path, 'verify-stability', '--set', 'harness.stability_ceiling=1e-30')
    assert status == cli.EXIT_FAILED
    with open(os.path.join(out, 'report.txt')) as f:
        assert 'pass=false' in f.read()


@pytest.mark.parametrize('command', ['verify-representation', 'verify-stability', 'verify-decay',
                                     'verify-density'])
def test_verifiers_pass_on_minimal_config(tmp_path, command):
    status, out = _main(tmp_path, command)
    assert status == cli.EXIT_OK
    assert os.path.exists(os.path.join(out, 'report.txt'))


def test_verify_kinematics(tmp_path):
    status, out = _main(tmp_path, 'verify-kinematics')
    assert status == cli.EXIT_OK
    with open(os.path.join(out, 'report.txt')) as f:
        assert len(f.read().splitlines()) == 9
