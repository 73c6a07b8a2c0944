"""Potentials shipped with the package.

nonhermitian_m2  m = 2, C = [[i, 1], [0, -i]] (distinct mean eigenvalues),
                 first harmonics coupling both components
jordan_m2        same harmonics, C = [[0, 1], [0, 0]] (one Jordan block, r = 2)
hermitian_m2     Hermitian-valued control potential
hill_cos         scalar q(x) = 2 cos(2 pi x)
"""

from importlib import resources

from ..potential import load_potential


def example_names():
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".json"))


def example_path(name):
    path = resources.files(__name__) / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no shipped potential {name!r}; available: {example_names()}")
    return str(path)


def load_example(name):
    return load_potential(example_path(name))
