import json
import math

import numpy as np
import pytest

import oracles
from cvknit import fock
from cvknit.errors import InputError
from cvknit.gaussian import GaussianPure
from cvknit.states import (Cat, CatBatch, Coherent, DisplacedSqueezed, Fock, FockDiagonal,
                           GaussianSuperposition, PoissonRing, Product, complex_from_json,
                           pack_states, spec_from_json, spec_to_json, two_gaussian)

SPECS = [
    Fock(3),
    Coherent(0.4 - 0.2j),
    DisplacedSqueezed(0.1 + 0.3j, 0.25 * np.exp(0.4j)),
    Cat(1.0, -1.0, math.pi / 3),
    two_gaussian(0.6, GaussianPure(0.5), 0.6j, GaussianPure(-0.5, 0.2)),
    PoissonRing(0.3, 1),
    FockDiagonal((0.25, 0.75)),
    Product((Fock(1), Coherent(0.2))),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
def test_json_round_trip_is_lossless(spec):
    doc = spec_to_json(spec)
    text = json.dumps(doc)
    back = spec_from_json(json.loads(text))
    assert back == spec
    assert spec_to_json(back) == doc


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
def test_density_is_normalized(spec):
    D = 30
    rho = spec.density(D)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-9)
    assert np.allclose(rho, rho.conj().T)


def test_poisson_ring_populations():
    eps = 0.4
    pr0 = PoissonRing(eps, 0).density(20)
    assert np.allclose(np.diag(pr0).real, oracles.poisson(eps, 20), atol=1e-15)
    pr1 = np.diag(PoissonRing(eps, 1).density(20)).real
    ref = oracles.poisson(eps, 20)
    ref[0] = 0
    assert np.allclose(pr1, ref / (1 - math.exp(-eps)), atol=1e-14)
    assert PoissonRing(eps, 0).ket(20) is None


def test_superposition_ket_matches_direct_sum():
    spec = GaussianSuperposition(((1.0, GaussianPure(0.8)), (1.0, GaussianPure(-0.8))))
    ket = spec.ket(40)
    assert np.allclose(ket, oracles.cat_ket(0.8, -0.8, 0, 40), atol=1e-12)


def test_product_materializes_in_kron_order():
    p = Product((Fock(1), Fock(0)))
    v = p.ket(3)
    assert v[1 * 3 + 0] == 1 and p.n_modes == 2


def test_invalid_specs():
    with pytest.raises(InputError):
        Fock(-1)
    with pytest.raises(InputError):
        PoissonRing(0.0, 0)
    with pytest.raises(InputError):
        PoissonRing(0.1, 2)
    with pytest.raises(InputError):
        FockDiagonal((0.5, 0.4))


def test_decoder_reports_field_path():
    with pytest.raises(InputError, match=r"state\.parts\[1\]\.alpha"):
        spec_from_json({"type": "product", "parts": [{"type": "fock", "n": 0},
                                                     {"type": "coherent", "alpha": {"re": 1}}]})
    with pytest.raises(InputError, match="type"):
        spec_from_json({"type": "squid"})
    with pytest.raises(InputError):
        complex_from_json("1+2j", "x")


def test_cat_batch_matches_individual_cats():
    a = np.array([0.5, 1j, -0.3 + 0.2j])
    b = np.array([-0.5, 0.2, 0.7])
    t = np.array([0.0, 1.0, 2.5])
    batch = CatBatch(a, b, t)
    K = batch.kets(30)
    for i in range(3):
        assert np.allclose(K[:, i], fock.cat_state(a[i], b[i], t[i], 30), atol=1e-12)
        assert batch.norms()[i] == pytest.approx(fock.cat_norm(a[i], b[i], t[i]))
    assert batch[1] == Cat(complex(a[1]), complex(b[1]), float(t[1]))


def test_pack_states_threshold():
    few = [Cat(0.1 * i, 0.0, 0.0) for i in range(3)]
    assert not isinstance(pack_states(few), CatBatch)
    many = [Cat(0.01 * i, -0.01 * i, 0.0) for i in range(300)]
    assert isinstance(pack_states(many), CatBatch)
