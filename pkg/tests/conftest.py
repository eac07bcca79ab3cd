import sys

import pytest

from pedacc.inhabit import make_search_oracle

# checking deep derivations recurses proportionally to term depth
sys.setrecursionlimit(100000)


@pytest.fixture(scope="session")
def oracle():
    """One shared witness oracle; its cache is keyed by (env, goal) so
    sharing across tests is sound."""
    return make_search_oracle()
