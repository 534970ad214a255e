import pytest

from laffab.compiler import compile_graph, load, save
from laffab.graf import write_resource
from laffab.synth import toy_graph


@pytest.fixture
def toy():
    return toy_graph()


@pytest.fixture
def toy_dir(tmp_path, toy):
    write_resource(toy, tmp_path / "toy")
    return tmp_path / "toy"


@pytest.fixture
def toy_bundle(tmp_path, toy):
    save(compile_graph(toy), tmp_path / "bundle")
    return tmp_path / "bundle"


@pytest.fixture
def toy_corpus(toy_bundle):
    return load(toy_bundle)
