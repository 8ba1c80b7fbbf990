from pathlib import Path

import pytest

from dedmod.arith import build_HA
from dedmod.parser import parse_proofs, parse_theory

CORPUS = Path(__file__).resolve().parent.parent / "src" / "dedmod" / "corpus"


def load(theory: str, proofs: str | None = None):
    th = parse_theory((CORPUS / theory).read_text())
    if proofs is None:
        return th
    items = parse_proofs((CORPUS / proofs).read_text(), th)
    return th, {it.name: it for it in items}


@pytest.fixture(scope="session")
def ha():
    return build_HA()


@pytest.fixture(scope="session")
def HA(ha):
    return ha.system


@pytest.fixture(scope="session")
def demo():
    return load("demo.dmt").system


@pytest.fixture(scope="session")
def even():
    return load("ha_even.dmt", "even.dmp")


@pytest.fixture(scope="session")
def arith_items():
    return load("ha.dmt", "arith.dmp")


def even_spec(th):
    """The parity specification read off the ``ha_even`` theory."""
    from dedmod.extract import EquationalSpec

    return EquationalSpec(th.signature.functions["F"], (), tuple(th.equations))


def program(items: dict, name: str):
    """The proof ``name`` with the items before it inlined."""
    from dedmod.parser import resolve

    return resolve(list(items.values()), name)
