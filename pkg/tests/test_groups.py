import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocycle_lab.groups import (EXHAUSTIVE_ASSOC_CAP, ORDER_CAP, FiniteGroup,
                                SizeCapError, TableValidationError,
                                build_cyclic, build_from_spec,
                                build_heisenberg, build_product,
                                group_from_dict, group_to_dict, load_group,
                                save_group, validate_group)


def test_cyclic_tables():
    g = build_cyclic(5)
    assert g.order == 5
    assert g.mul[2, 4] == 1
    assert list(g.inv) == [0, 4, 3, 2, 1]
    assert g.is_abelian()
    assert g.label(3) == "3"


@given(st.integers(min_value=1, max_value=40))
def test_cyclic_inverse_property(n):
    g = build_cyclic(n)
    assert ((np.arange(n) + g.inv) % n == 0).all()


def test_product_mixed_radix():
    g = build_product([build_cyclic(2), build_cyclic(3)])
    # first factor most significant: (1,2) -> 1*3+2
    assert g.order == 6
    assert g.label(5) == "(1,2)"
    assert g.mul[5, 4] == 0          # (1,2)*(1,1) = (0,0)
    assert g.conv_index[5, 5] == 0


def test_product_z3_z4_is_z12():
    g = build_product([build_cyclic(3), build_cyclic(4)])
    orders = g.element_orders()
    census = {d: int((orders == d).sum()) for d in sorted(set(orders))}
    # Z_12 has phi(d) elements of order d for each divisor d
    assert census == {1: 1, 2: 1, 3: 2, 4: 2, 6: 2, 12: 4}


def test_heisenberg_structure():
    g = build_heisenberg(2)
    assert g.order == 8
    enc = lambda a, b, c: (a * 2 + b) * 2 + c
    # (0,1,0)*(0,0,1) = (1,1,1) but (0,0,1)*(0,1,0) = (0,1,1)
    assert g.mul[enc(0, 1, 0), enc(0, 0, 1)] == enc(1, 1, 1)
    assert g.mul[enc(0, 0, 1), enc(0, 1, 0)] == enc(0, 1, 1)
    assert not g.is_abelian()
    # inverse of (a,b,c) is (-a+bc, -b, -c)
    assert g.inv[enc(1, 1, 1)] == enc(0, 1, 1)
    assert "[[1,b,a],[0,1,c],[0,0,1]]" in g.metadata["convention"]


def test_heisenberg_odd_n_inverse_formula():
    n = 3
    g = build_heisenberg(n)
    for gi in range(g.order):
        a, b, c = gi // (n * n), (gi // n) % n, gi % n
        expected = ((-a + b * c) % n * n + (-b) % n) * n + (-c) % n
        assert g.inv[gi] == expected


def test_validate_catches_identity_violation():
    mul = build_cyclic(4).mul.copy()
    mul[0, 2] = 3
    mul[0, 3] = 2
    with pytest.raises(TableValidationError, match=r"identity axiom fails: mul\(0,2\)"):
        validate_group(4, mul, np.array([0, 3, 2, 1]))


def test_validate_catches_associativity_violation():
    # swap row-1 entries in Z_5: rows stay permutations, identity and
    # inverse axioms still hold, but (1*1)*2 != 1*(1*2)
    mul = build_cyclic(5).mul.copy()
    mul[1, 2], mul[1, 3] = mul[1, 3], mul[1, 2]
    inv = np.argmax(mul == 0, axis=1)
    with pytest.raises(TableValidationError, match="associativity fails"):
        validate_group(5, mul, inv)


def test_group_from_dict_rejects_non_permutation_row():
    d = group_to_dict(build_cyclic(4))
    d["mul"][2] = [2, 2, 0, 1]
    with pytest.raises(TableValidationError, match="row 2 .* not a permutation"):
        group_from_dict(d)


def test_inverse_axiom_violation_named():
    mul = build_cyclic(5).mul.copy()
    # swap zeros of rows 2 and 3 (columns 3 and 2): rows stay permutations
    mul[2, 2], mul[2, 3] = mul[2, 3], mul[2, 2]
    mul[3, 2], mul[3, 3] = mul[3, 3], mul[3, 2]
    inv = np.argmax(mul == 0, axis=1)
    with pytest.raises(TableValidationError, match="inverse axiom fails|associativity"):
        validate_group(5, mul, inv)


def test_size_caps():
    with pytest.raises(SizeCapError):
        build_heisenberg(17)
    with pytest.raises(SizeCapError):
        build_product([build_cyclic(65), build_cyclic(65)])
    # exactly at the cap is fine
    assert build_product([build_cyclic(64), build_cyclic(64)]).order == ORDER_CAP


def test_large_group_uses_sampled_associativity():
    # above the exhaustive cap construction must still validate quickly
    g = build_product([build_cyclic(EXHAUSTIVE_ASSOC_CAP + 2)])
    assert g.order == EXHAUSTIVE_ASSOC_CAP + 2


def test_save_load_roundtrip(tmp_path):
    g = build_heisenberg(2)
    path = tmp_path / "h2.json"
    save_group(g, str(path))
    g2 = load_group(str(path))
    assert g2.order == g.order
    assert np.array_equal(g2.mul, g.mul)
    assert np.array_equal(g2.inv, g.inv)
    assert g2.labels == g.labels


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(TableValidationError, match="invalid JSON"):
        load_group(str(path))
    path.write_text(json.dumps({"order": 2}))
    with pytest.raises(TableValidationError, match="malformed group JSON"):
        load_group(str(path))


def test_load_rejects_label_mismatch():
    d = group_to_dict(build_cyclic(3))
    d["labels"] = ["a", "b"]
    with pytest.raises(TableValidationError, match="labels"):
        group_from_dict(d)


def test_build_from_spec_dispatch():
    assert build_from_spec({"kind": "cyclic", "n": 6}).order == 6
    assert build_from_spec({"kind": "product", "n": 2, "m": 3}).order == 8
    assert build_from_spec({"kind": "heisenberg", "n": 2}).order == 8
    d = group_to_dict(build_cyclic(3))
    d["kind"] = "table"
    assert build_from_spec(d).order == 3
    with pytest.raises(ValueError, match="unknown group kind"):
        build_from_spec({"kind": "dihedral", "n": 3})


def test_shared_index_tables():
    g = build_cyclic(6)
    assert np.array_equal(g.conv_index, g.mul[g.inv])
    assert np.array_equal(g.rep_index, g.mul[:, g.inv])
    with pytest.raises(ValueError):
        g.mul[0, 0] = 1   # tables are frozen read-only
