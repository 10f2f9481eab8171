# -*- coding: utf-8 -*-
import pytest

import csv
import hashlib
import json

from mabound import exceptions as exc
from mabound.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SEARCH,
    RunConfig,
    load_config,
    main,
    run,
)

DISK = {'constraints': [{'type': 'ball', 'center': [0.0, 0.0], 'radius': 1.0}]}
SQUARE = {'constraints': [{'type': 'box', 'lo': [-1.0, -1.0], 'hi': [1.0, 1.0]}]}
HYPERBOLIC = {'kind': 'pure_hyperbolic', 'n': 2}
DISK_CONTACT = {'point': [0.0, -1.0], 'a': [2.0], 'eta': [0.5]}
GROWTH = {'n': 2, 'k': 1, 'a': [2.0], 'eta': [0.5], 'alpha': 4.0, 'beta': 3.0}


def write_config(tmp_path, payload, name='config.json'):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding='utf-8')
    return path


def read_json(path):
    return json.loads(path.read_text(encoding='utf-8'))


def test_exponent_command(tmp_path, capsys):
    config = write_config(tmp_path, {'command': 'exponent', 'growth_params': GROWTH})
    out = tmp_path / 'out'
    assert main(['--config', str(config), '--out', str(out)]) == EXIT_OK
    report = read_json(out / 'exponent.json')
    assert report['mu'] == pytest.approx(0.5)
    assert report['b'] == pytest.approx([2.0])
    assert report['admissible']
    assert json.loads(capsys.readouterr().out)['mu'] == pytest.approx(0.5)
    manifest = read_json(out / 'manifest.json')
    assert manifest['command'] == 'exponent'
    assert manifest['exit_code'] == EXIT_OK
    expected = hashlib.sha256((out / 'exponent.json').read_bytes()).hexdigest()
    assert manifest['files'] == {'exponent.json': expected}


def test_runs_are_deterministic(tmp_path):
    config = write_config(tmp_path, {'command': 'exponent', 'growth_params': GROWTH})
    for name in ('first', 'second'):
        assert main(['--config', str(config), '--out', str(tmp_path / name)]) == EXIT_OK
    first = (tmp_path / 'first' / 'manifest.json').read_bytes()
    assert first == (tmp_path / 'second' / 'manifest.json').read_bytes()


def test_command_and_seed_overrides(tmp_path):
    config = write_config(tmp_path, {'command': 'certify', 'growth_params': GROWTH})
    out = tmp_path / 'out'
    assert main(['exponent', '--config', str(config), '--out', str(out), '--seed', '7']) == EXIT_OK
    manifest = read_json(out / 'manifest.json')
    assert manifest['command'] == 'exponent'
    assert manifest['seed'] == 7


def test_malformed_config_writes_nothing(tmp_path):
    config = tmp_path / 'broken.json'
    config.write_text('{"command": "exponent",', encoding='utf-8')
    out = tmp_path / 'out'
    assert main(['--config', str(config), '--out', str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert main(['--config', str(tmp_path / 'missing.json'), '--out', str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_config_validation(tmp_path):
    with pytest.raises(exc.ConfigError):
        RunConfig.from_dict({'command': 'exponent', 'colour': 'blue'})
    with pytest.raises(exc.ConfigError):
        RunConfig.from_dict({'growth_params': GROWTH})
    with pytest.raises(exc.ConfigError):
        RunConfig.from_dict({'command': 'plot'})
    with pytest.raises(exc.ConfigError):
        load_config(write_config(tmp_path, [1, 2, 3]))
    config = load_config(write_config(tmp_path, {'command': 'exponent', 'seed': 3}), 'certify')
    assert config.command == 'certify'
    assert config.seed == 3
    assert config.digest == RunConfig.from_dict({'command': 'certify', 'seed': 3}).digest


def test_missing_input_is_a_config_error(tmp_path):
    out = tmp_path / 'out'
    assert run(RunConfig(command='exponent'), out) == EXIT_CONFIG
    assert not out.exists()
    config = RunConfig(command='exponent', solver={'h': 0.1, 'smoothing': 1})
    assert run(config, out) != EXIT_OK
    assert not out.exists()


def test_verify_examples(tmp_path):
    out = tmp_path / 'out'
    assert run(RunConfig(command='verify-examples'), out) == EXIT_OK
    rows = read_json(out / 'examples.json')['examples']
    assert [row['kind'] for row in rows] == ['ball', 'cylinder', 'cone']
    assert all(row['max_residual'] <= 1e-6 for row in rows)
    assert all(row['passed'] for row in rows)
    with (out / 'examples.csv').open(newline='', encoding='utf-8') as f:
        assert len(list(csv.DictReader(f))) == 3


def test_certify_flat_side_fails(tmp_path):
    out = tmp_path / 'out'
    contact = {'point': [0.0, -1.0], 'a': [2.0], 'eta': [0.1]}
    config = RunConfig(command='certify', domain=SQUARE, contact=contact)
    assert run(config, out) == EXIT_SEARCH
    assert not read_json(out / 'certificate.json')['passed']
    assert read_json(out / 'manifest.json')['exit_code'] == EXIT_SEARCH


def test_barrier_command(tmp_path):
    out = tmp_path / 'out'
    config = RunConfig(command='barrier', domain=DISK, rhs=HYPERBOLIC, contact=DISK_CONTACT)
    assert run(config, out) == EXIT_OK
    report = read_json(out / 'barrier.json')
    assert report['mu'] == pytest.approx(0.5)
    assert report['min_FW'] > 1.0
    assert report['diagnostics']['tau1'] > 0.0
    with (out / 'barrier_samples.csv').open(newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        assert reader.fieldnames == ['y0', 'y1', 'W', 'FW']
        assert all(float(row['FW']) > 1.0 for row in reader)
    assert set(read_json(out / 'manifest.json')['files']) == {'barrier.json', 'barrier_samples.csv'}


def test_solve_command(tmp_path):
    out = tmp_path / 'out'
    config = RunConfig(
        command='solve',
        domain=DISK,
        rhs=HYPERBOLIC,
        contact=DISK_CONTACT,
        solver={'h': 0.125, 'tol': 1e-8},
    )
    assert run(config, out) == EXIT_OK
    assert read_json(out / 'comparison.json')['passed']
    convergence = read_json(out / 'convergence.json')
    assert convergence['converged']
    with (out / 'solution.csv').open(newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == convergence['nodes']
    assert all(float(row['u']) < 0.0 for row in rows)
