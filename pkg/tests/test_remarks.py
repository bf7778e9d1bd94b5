from fluxring.remarks import REMARKS, remark_1b, remark_4, verify_remarks


def test_spin_imbalanced_infinite_u_lattice():
    results = remark_1b()
    assert results and all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_spin_dependent_couplings():
    results = remark_4()
    assert results and all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_selector_and_unknown_key():
    res = verify_remarks(["3"])
    assert len(res) == 2 and all(r.passed for r in res)
    try:
        verify_remarks(["42"])
    except KeyError as exc:
        assert "42" in str(exc)
    else:
        raise AssertionError("unknown remark accepted")
    assert set(REMARKS) == {"1a", "1b", "2", "3", "4", "5", "6", "7", "8", "9"}
