"""
Integration Test for Hybrid Bell
Tests configuration handling and the complete command-line workflow
"""
import io
import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import main
from config_manager import ConfigManager, get_config_manager, reset_config_manager
from photonics.errors import DomainError, NumericalError
from version_info import get_current_version


def cli(*argv):
    """Run the CLI on a fresh configuration, capturing standard output"""
    reset_config_manager()
    stream = io.StringIO()
    code = main.run(list(argv), stream=stream)
    return code, stream.getvalue()


def read_lines(path):
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return f.read().split('\n')


def test_config_manager():
    """Test configuration manager"""
    print("Testing Configuration Manager...")

    config = ConfigManager()
    assert config.get('cutoffs.psi2') == 4
    assert config.get('cutoffs.tmss') == 60
    assert config.get('missing.key', 'fallback') == 'fallback'
    print(f"  ✓ Optimizer settings: {config.get_optimizer_settings()}")

    config.set('optimizer.grid_points', 41)
    assert config.get_optimizer_settings()['grid_points'] == 41
    assert ConfigManager.DEFAULT_CONFIG['optimizer']['grid_points'] == 81
    print("  ✓ Set configuration values without touching defaults")

    assert config.get_workers() >= 1
    config.set('parallel.workers', 3)
    assert config.get_workers() == 3
    print("  ✓ Worker count resolved")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'settings.json')
        assert config.export_config(path)
        other = ConfigManager()
        assert other.import_config(path)
        assert other.get('optimizer.grid_points') == 41
        with open(path, 'w', encoding='utf-8') as f:
            json.dump({'cutoffs': {'psi2': 6}}, f)
        merged = ConfigManager(path)
        assert merged.get('cutoffs.psi2') == 6
        assert merged.get('cutoffs.cat') == 60
        assert not other.import_config(os.path.join(tmp, 'missing.json'))
    print("  ✓ Export, import and merge with defaults")

    print("✓ Configuration Manager tests passed!\n")


def test_run_file_parsing():
    """Test key=value run files"""
    print("Testing Run Files...")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'run.cfg')
        with open(path, 'w', encoding='utf-8') as f:
            f.write("# grid\n--z-min = 0.5\nz-max=0.9   # upper end\n\nz-steps=3\n")
        values = ConfigManager.load_run_file(path)
        assert values == {'z-min': '0.5', 'z-max': '0.9', 'z-steps': '3'}
        print("  ✓ Comments, blanks and leading dashes handled")

        with open(path, 'w', encoding='utf-8') as f:
            f.write("z-min 0.5\n")
        try:
            ConfigManager.load_run_file(path)
            raise AssertionError("malformed line accepted")
        except DomainError:
            print("  ✓ Malformed line rejected")

    print("✓ Run file tests passed!\n")


def test_psi2_scan_command():
    """Test the psi2-scan workflow end to end"""
    print("Testing psi2-scan...")

    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'psi2.csv')
        code, _ = cli('psi2-scan', '--z-min', '0.5', '--z-max', '1.0', '--z-steps', '3', '--out', out)
        assert code == 0
        lines = read_lines(out)
        assert lines[0] == (f"# hybrid-bell {get_current_version()} psi2-scan "
                            f"--z-min=0.5 --z-max=1 --z-steps=3 --t=1 --eta=1")
        assert lines[1] == "z,S,minus_position"
        assert len(lines) == 6 and lines[-1] == ""
        z, s, minus = lines[3].split(',')
        assert z == "0.75" and minus == "3"
        assert 2.0 < float(s) < 2.3
        print(f"  ✓ Wrote {len(lines) - 3} rows, S(0.75) = {s}")

    code, text = cli('psi2-scan', '--z-min', '0.83', '--z-max', '0.83', '--z-steps', '1')
    assert code == 0
    assert text.splitlines()[2].startswith("0.83,2.2")
    print("  ✓ Standard output used when --out is absent")

    print("✓ psi2-scan tests passed!\n")


def test_frontier_command():
    """Test the frontier workflow"""
    print("Testing frontier...")

    code, text = cli('frontier', '--t-min', '1', '--t-max', '1', '--t-steps', '1', '--no-cross-check')
    assert code == 0
    lines = text.splitlines()
    assert lines[0].endswith("frontier --t-min=1 --t-max=1 --t-steps=1 --no-cross-check")
    assert lines[1] == "t,eta_min,z_opt"
    t, eta_min, z_opt = lines[2].split(',')
    assert abs(float(eta_min) - 0.711) < 0.005
    print(f"  ✓ eta_min(t=1) = {eta_min} at z = {z_opt}")

    print("✓ frontier tests passed!\n")


def test_states_scan_command():
    """Test the non-violation search"""
    print("Testing states-scan...")

    code, text = cli('states-scan', '--state', 'single-photon-path', '--z-min', '0.2', '--z-max', '2',
                     '--z-steps', '5')
    assert code == 0
    lines = text.splitlines()
    assert lines[1] == "state,param,z,S_max"
    state, param, z, s_max = lines[2].split(',')
    assert state == "single-photon-path" and param == ""
    assert float(s_max) <= 2 + 1e-9
    print(f"  ✓ Largest S = {s_max}")

    code, text = cli('states-scan', '--state', 'cat', '--alpha', '1', '--z-min', '0.5', '--z-max', '1.5',
                     '--z-steps', '3', '--x-only')
    assert code == 0
    state, param, _, s_max = text.splitlines()[2].split(',')
    assert state == "cat" and param == "1"
    assert float(s_max) <= 2 + 1e-9
    print("  ✓ Cat state row carries its amplitude")

    code, text = cli('states-scan', '--state', 'cat', '--alpha-min', '0.5', '--alpha-max', '1',
                     '--alpha-steps', '2', '--z-min', '0.5', '--z-max', '1', '--z-steps', '2', '--x-only')
    assert code == 0
    assert "--alpha=0.5,1" in text.splitlines()[0]
    assert cli('states-scan', '--state', 'cat', '--alpha-steps', '3')[0] == 2
    assert cli('states-scan', '--state', 'cat', '--alpha-min', '0', '--alpha-max', '1',
               '--alpha-steps', '2')[0] == 2
    print("  ✓ Amplitude grid flags replace --alpha")

    print("✓ states-scan tests passed!\n")


def test_tmss_command():
    """Test the TMSS scan at the reported optimum"""
    print("Testing tmss-scan...")

    code, text = cli('tmss-scan', '--lambda-min', '0.83', '--lambda-max', '0.83', '--lambda-steps', '1',
                     '--z-min', '0.86', '--z-max', '0.86', '--z-steps', '1', '--cutoff', '60')
    assert code == 0
    lines = text.splitlines()
    assert "--eta=1" in lines[0]
    assert lines[1] == "lambda,z,S,minus_position"
    s = float(lines[2].split(',')[2])
    assert abs(s - 2.05) < 0.01
    print(f"  ✓ S(0.83, 0.86) = {s}")

    print("✓ tmss-scan tests passed!\n")


def test_mc_reproducible():
    """Test that a fixed seed reproduces the CSV byte for byte"""
    print("Testing mc...")

    with tempfile.TemporaryDirectory() as tmp:
        first, second = os.path.join(tmp, 'a.csv'), os.path.join(tmp, 'b.csv')
        assert cli('mc', '--z', '0.83', '--shots', '20000', '--seed', '9', '--out', first)[0] == 0
        assert cli('mc', '--z', '0.83', '--shots', '20000', '--seed', '9', '--workers', '4',
                   '--out', second)[0] == 0
        with open(first, 'rb') as f1, open(second, 'rb') as f2:
            assert f1.read() == f2.read()
        lines = read_lines(first)
        assert lines[1] == "shots,seed,S_hat,std_err"
        assert lines[2].startswith("20000,9,")
        print("  ✓ Identical seed gives identical output")

        settings = os.path.join(tmp, 'settings.json')
        with open(settings, 'w', encoding='utf-8') as f:
            json.dump({'sampling': {'block_size': 4096}}, f)
        third = os.path.join(tmp, 'c.csv')
        assert cli('mc', '--z', '0.83', '--shots', '20000', '--seed', '9', '--settings', settings,
                   '--out', third)[0] == 0
        assert read_lines(third)[2] == lines[2]
        print("  ✓ Settings file leaves the sampled estimate unchanged")

    print("✓ mc tests passed!\n")


def test_run_file_precedence():
    """Test that flags override run-file values"""
    print("Testing --config...")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'run.cfg')
        with open(path, 'w', encoding='utf-8') as f:
            f.write("z-min=0.5\nz-max=0.6\nz-steps=2\nt=0.9\n")
        code, text = cli('psi2-scan', '--config', path)
        assert code == 0
        assert len(text.splitlines()) == 4
        assert "--t=0.9" in text.splitlines()[0]
        print("  ✓ Run-file values applied")

        code, text = cli('psi2-scan', '--config', path, '--z-steps', '3')
        assert code == 0
        assert len(text.splitlines()) == 5
        print("  ✓ Flags take precedence")

        with open(path, 'w', encoding='utf-8') as f:
            f.write("zeta=1\n")
        assert cli('psi2-scan', '--config', path)[0] == 2
        print("  ✓ Unknown run-file key rejected")

    print("✓ --config tests passed!\n")


def test_exit_codes():
    """Test exit code mapping"""
    print("Testing exit codes...")

    assert cli('psi2-scan', '--t', '1.5')[0] == 2
    assert cli('psi2-scan', '--z-min', '0')[0] == 2
    assert cli('psi2-scan', '--bogus')[0] == 2
    assert cli('mc', '--shots', '3')[0] == 2
    assert cli('tmss-scan', '--lambda-max', '1.0')[0] == 2
    assert cli('frontier', '--t-min', '0')[0] == 2
    assert cli('psi2-scan', '--settings', '/nonexistent/settings.json')[0] == 2
    assert cli()[0] == 2
    print("  ✓ Domain and usage errors exit with 2")

    def numerical_failure(cfg):
        raise NumericalError("overlap did not converge", achieved_tolerance=1e-9)

    def crash(cfg):
        raise RuntimeError("boom")

    original = main.HANDLERS['psi2-scan']
    try:
        main.HANDLERS['psi2-scan'] = numerical_failure
        assert cli('psi2-scan')[0] == 3
        main.HANDLERS['psi2-scan'] = crash
        assert cli('psi2-scan')[0] == 1
    finally:
        main.HANDLERS['psi2-scan'] = original
    print("  ✓ Numerical failures exit with 3, anything else with 1")

    assert cli('--version')[0] == 0
    print("  ✓ --version exits cleanly")

    print("✓ Exit code tests passed!\n")


def test_settings_file():
    """Test --settings JSON handling"""
    print("Testing --settings...")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'settings.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump({'optimizer': {'grid_points': 21}, 'logging': {'level': 'ERROR'}}, f)
        reset_config_manager()
        code = main.run(['psi2-scan', '--z-min', '0.8', '--z-max', '0.8', '--z-steps', '1', '--settings', path],
                        stream=io.StringIO())
        assert code == 0
        assert get_config_manager().get('optimizer.grid_points') == 21
        print("  ✓ Settings file merged into the active configuration")

    reset_config_manager()
    print("✓ --settings tests passed!\n")


def run_all_tests():
    """Run all integration tests"""
    print("=" * 60)
    print("HYBRID BELL - Integration Tests")
    print("=" * 60)
    print()

    tests = [
        ("Configuration Manager", test_config_manager),
        ("Run Files", test_run_file_parsing),
        ("psi2-scan", test_psi2_scan_command),
        ("frontier", test_frontier_command),
        ("states-scan", test_states_scan_command),
        ("tmss-scan", test_tmss_command),
        ("mc", test_mc_reproducible),
        ("--config", test_run_file_precedence),
        ("Exit Codes", test_exit_codes),
        ("--settings", test_settings_file),
    ]

    passed = 0
    failed = 0

    for name, test_func in tests:
        try:
            test_func()
            passed += 1
        except Exception as e:
            failed += 1
            print(f"✗ {name} failed with exception: {e}\n")

    print("=" * 60)
    print(f"Test Results: {passed} passed, {failed} failed")
    print("=" * 60)

    return failed == 0


if __name__ == '__main__':
    success = run_all_tests()
    sys.exit(0 if success else 1)
