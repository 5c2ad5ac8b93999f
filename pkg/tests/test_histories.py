import pytest
from hypothesis import given
from hypothesis import strategies as st

from privexp.errors import ParseError
from privexp.histories import EMPTY, RISKY, SAFE, History, all_histories, counters_from_scratch, parse, render

actions = st.text(alphabet="RS", max_size=60)


def test_extend_from_empty():
    h = EMPTY.extend(RISKY)
    assert h.actions == "R"
    assert h.n_experiments == 1 and h.experiments[0] == 1 and h.undisclosed(0) == 1


def test_turns_alternate_in_counters():
    # RS then R: player 1 moved R twice, player 2's S disclosed nothing
    h = History.of("RS").extend(RISKY)
    assert h.experiments == (2, 0) and h.undisclosed(0) == 2


def test_own_safe_discloses():
    h = History.of("RSSR")
    assert h.disclosed(0) == 1 and h.undisclosed(0) == 0
    assert h.experiments[1] == 1 and h.undisclosed(1) == 1


def test_second_mover_counters():
    h = History.of("RSRR")
    assert h.experiments == (2, 1) and h.undisclosed(1) == 1 and h.disclosed(1) == 0


@pytest.mark.parametrize("n_star,r", [(3, 0), (3, 2), (5, 5)])
def test_staggered_path_counts(n_star, r):
    h = History.of("RS" * r + "RR" * (n_star - r))
    assert h.experiments == (n_star, n_star - r)


def test_active_player_alternates():
    h = EMPTY
    for k, a in enumerate("RSRSSR"):
        assert h.active_player == (1 if k % 2 == 0 else 2)
        h = h.extend(a)


@given(actions)
def test_incremental_counters_match_scratch(text):
    h = History.of(text)
    exp, run = counters_from_scratch(text)
    assert h.experiments == exp and h.trailing == run
    for i in (0, 1):
        assert h.disclosed(i) + h.undisclosed(i) == h.experiments[i]
    assert h.n_experiments == sum(exp)


@given(actions, st.sampled_from([0, 1]))
def test_safe_resets_trailing_run(text, _):
    h = History.of(text)
    i = h.active
    s = h.extend(SAFE)
    assert s.undisclosed(i) == 0 and s.disclosed(i) == s.experiments[i]


@pytest.mark.parametrize("text,expected", [
    ("(RR)^2·S", "RRRRS"),
    ("RS·RR·S", "RSRRS"),
    ("", ""),
    ("RS.SR.RR", "RSSRRR"),
    ("((RS)^2R)^2", "RSRSRRSRSR"),
    ("S^3R", "SSSR"),
])
def test_parse_examples(text, expected):
    assert parse(text).actions == expected


def test_parse_star_tail():
    assert parse("(RR)^2·S*", star=3).actions == "RRRRSSS"
    assert parse("RS^*", star=2).actions == "RSS"


@pytest.mark.parametrize("text,offset", [("RRX", 2), ("(RR", 3), ("RR)", 2), ("R^x", 2), ("R·Q", 3)])
def test_parse_errors_report_offset(text, offset):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.offset == offset


@given(actions)
def test_render_round_trip(text):
    h = History.of(text)
    assert parse(render(h)) == h


def test_render_compresses_runs():
    assert render(History.of("RRRRS")) == "(RR)^2·S"
    assert render(History.of("RSSRRR")) == "RS·SR·RR"


def test_all_histories_levels():
    hs = list(all_histories(3))
    assert len(hs) == 1 + 2 + 4 + 8
    assert [len(h) for h in hs] == sorted(len(h) for h in hs)
