"""One test per acceptance criterion; each prints its verdict line."""

from fluxring.suite import run_criterion


def _check(number):
    res = run_criterion(number, seed=0)
    print(res.line())
    if res.detail:
        print("    " + res.detail)
    assert res.passed, res.line()


def test_c01_theorem_even_length_minimizer():
    _check(1)


def test_c02_theorem_odd_length_minimizer():
    _check(2)


def test_c03_infinite_u_minimizers_exactly_zero_and_pi():
    _check(3)


def test_c04_three_electrons_on_four_sites_golden_values():
    _check(4)


def test_c05_infinite_u_periodicity():
    _check(5)


def test_c06_zero_pi_alternation_over_sz():
    _check(6)


def test_c07_spin_ordering_even_steps():
    _check(7)


def test_c08_ferromagnetic_ground_state_at_pi():
    _check(8)


def test_c09_infinite_site_threshold():
    _check(9)


def test_c10_free_fermion_maximizers():
    _check(10)


def test_c11_gap_times_length_bounded():
    _check(11)


def test_c12_hopping_graph_machinery():
    _check(12)


def test_c13_property_suites():
    _check(13)
