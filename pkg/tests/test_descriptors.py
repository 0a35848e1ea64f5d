import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from infoframe.descriptors import DescriptorError, parse_operator
from infoframe.opalg import dket, operator_to_json, weyl_basis

from conftest import SX, SY, SZ, unit


def test_pauli():
    assert_allclose(parse_operator("pauli:ZZ", 2), np.kron(SZ, SZ))
    assert_allclose(parse_operator("pauli:XY", 2), np.kron(SX, SY))


@pytest.mark.parametrize("desc,token", [("pauli:QQ", "Q"), ("pauli:XQ", "Q"), ("nope:1", "nope"),
                                        ("matelem:0,0,0,5", "5"), ("weyl:1,0", "1,0"),
                                        ("bellproj:x", "x")])
def test_errors_name_the_token(desc, token):
    with pytest.raises(DescriptorError) as info:
        parse_operator(desc, 2)
    assert info.value.token == token
    assert repr(token) in str(info.value)


def test_pauli_needs_qubits():
    with pytest.raises(DescriptorError):
        parse_operator("pauli:ZZ", 3)


def test_weyl():
    b = weyl_basis(3)
    assert_allclose(parse_operator("weyl:1,2x0,1", 3), np.kron(b[1 * 3 + 2], b[0 * 3 + 1]))


def test_matelem():
    assert_allclose(parse_operator("matelem:0,1,1,0", 2), np.kron(unit(2, 0, 1), unit(2, 1, 0)))


def test_bell_operators():
    b = weyl_basis(3)
    assert_allclose(parse_operator("bellproj:4", 3), np.outer(dket(b[4]), dket(b[4]).conj()) / 3)
    assert_allclose(parse_operator("belloffdiag:1,2", 3), np.outer(dket(b[1]), dket(b[2]).conj()) / 3)


def test_file(tmp_path):
    o = np.arange(16).reshape(4, 4) * (1 + 0.5j)
    path = tmp_path / "op.json"
    path.write_text(json.dumps(operator_to_json(o)))
    assert_allclose(parse_operator(f"file:{path}", 2), o)
    with pytest.raises(DescriptorError):
        parse_operator(f"file:{path}", 3)
    with pytest.raises(DescriptorError):
        parse_operator(f"file:{tmp_path / 'missing.json'}", 2)
