import json
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from incmeter.datagen import (
    _random_tree,
    STANDARD_CONFIGS,
    Dataset,
    DatasetFormatError,
    GenConfig,
    generate_dataset,
    generate_formula,
    generate_kb,
    generate_kbs,
    instance_rng,
    load_dataset,
    save_dataset,
)
from incmeter.logic import And, Lit, atoms_of, literals, serialize_formula
from incmeter.measures import measure

SMALL = GenConfig(atom_pool=3, max_formulas=5, n_instances=60, seed=3)


def test_nine_settings():
    assert sorted(STANDARD_CONFIGS) == [(a, f) for a in (3, 6, 9) for f in (5, 10, 15)]


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(atom_pool=0)
    with pytest.raises(ValueError):
        GenConfig(atom_pool=27)
    with pytest.raises(ValueError):
        GenConfig(length_dist="poisson")
    assert GenConfig(6, 10).label == "6-10"


@given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.integers(1, 10))
def test_formula_bounds(seed, n_atoms, max_lits):
    rng = np.random.default_rng(seed)
    atoms = [chr(ord("a") + i) for i in range(n_atoms)]
    f = generate_formula(rng, atoms, max_lits)
    lits = list(literals(f))
    assert 1 <= len(lits) <= max_lits
    assert {x.atom for x in lits} <= set(atoms)


@given(st.integers(0, 2**32 - 1), st.sampled_from(STANDARD_CONFIGS))
def test_kb_bounds(seed, setting):
    config = GenConfig(*setting)
    kb = generate_kb(np.random.default_rng(seed), config)
    assert 1 <= len(kb) <= config.max_formulas
    assert atoms_of(kb) <= set(config.atoms)
    assert len(set(kb.to_strings())) == len(kb)


def test_literal_count_is_uniform():
    rng = np.random.default_rng(0)
    counts = Counter(len(list(literals(generate_formula(rng, list("abc"))))) for _ in range(5000))
    assert set(counts) == set(range(1, 11))
    assert max(counts.values()) - min(counts.values()) < 150


def test_geometric_lengths_are_short():
    rng = np.random.default_rng(0)
    ks = [len(list(literals(generate_formula(rng, list("abc"), length_dist="geometric"))))
          for _ in range(3000)]
    assert max(ks) <= 10
    assert np.mean(ks) < 3.5


def test_tree_shapes_are_uniform():
    # three leaves admit two binary shapes; when the two operators differ the
    # shape survives flattening and the compound child sits left or right
    rng = np.random.default_rng(1)
    leaves = [Lit("a"), Lit("b"), Lit("c")]
    sides = Counter()
    for _ in range(4000):
        t = _random_tree(rng, leaves, and_prob=0.5)
        if len(t.children) == 2:
            sides["left" if isinstance(t.children[1], Lit) else "right"] += 1
    assert sum(sides.values()) > 1500
    assert abs(sides["left"] - sides["right"]) < 0.1 * sum(sides.values())


def test_generation_is_deterministic():
    assert generate_kbs(SMALL) == generate_kbs(SMALL)
    other = generate_kbs(replace(SMALL, seed=4))
    assert generate_kbs(SMALL) != other


def test_datasets_are_prefix_stable():
    small = generate_dataset(replace(SMALL, n_instances=20))
    large = generate_dataset(SMALL)
    assert small.instances == large.instances[:20]
    assert large.head(20).instances == small.instances
    assert large.head(20).config.n_instances == 20


def test_instance_rng_independent_of_position():
    a = instance_rng(5, 11).random()
    b = instance_rng(5, 11).random()
    assert a == b != instance_rng(5, 12).random()


def test_labels_are_exact():
    for inst in generate_dataset(SMALL):
        assert (inst.label_mi, inst.label_at) == measure(inst.kb)


def test_parallel_generation_matches_serial():
    assert generate_dataset(SMALL, workers=2).instances == generate_dataset(SMALL).instances


# --- files ------------------------------------------------------------------


def test_roundtrip(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "d.jsonl"
    save_dataset(ds, path)
    assert len(path.read_text().splitlines()) == len(ds)
    back = load_dataset(path, verify=True)
    assert back.instances == ds.instances
    assert back.config == SMALL


def test_roundtrip_without_config(tmp_path):
    ds = Dataset(None, generate_dataset(SMALL).instances[:5])
    path = tmp_path / "d.jsonl"
    save_dataset(ds, path)
    assert load_dataset(path).config is None


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("not json", "invalid JSON"),
        ("[1, 2]", "JSON object"),
        ('{"kb": ["a"], "i_mi": 0}', "missing field 'i_at'"),
        ('{"kb": "a", "i_mi": 0, "i_at": 0}', "list of strings"),
        ('{"kb": ["a"], "i_mi": -1, "i_at": 0}', "non-negative"),
        ('{"kb": ["a &"], "i_mi": 0, "i_at": 0}', "line 2"),
    ],
)
def test_malformed_lines(tmp_path, line, fragment):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"kb": ["a"], "i_mi": 0, "i_at": 0}\n' + line + "\n")
    with pytest.raises(DatasetFormatError, match=fragment):
        load_dataset(path)


def test_verify_catches_wrong_labels(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps({"kb": ["a", "!a"], "i_mi": 2, "i_at": 1}) + "\n")
    assert load_dataset(path).instances[0].label_mi == 2
    with pytest.raises(DatasetFormatError, match="do not match"):
        load_dataset(path, verify=True)


def test_sidecar_count_mismatch(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "d.jsonl"
    save_dataset(ds, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DatasetFormatError, match="sidecar"):
        load_dataset(path)


def test_serialized_kbs_reparse(tmp_path):
    ds = generate_dataset(replace(SMALL, atom_pool=9, max_formulas=15, n_instances=10))
    for inst in ds:
        assert all(serialize_formula(f) == s for f, s in zip(inst.kb, inst.kb.to_strings()))
