"""Acceptance suite: the checks the package must pass before shipping.

Each test covers one headline requirement and prints a single PASS line
(visible with `pytest -v -rA` or `-s`) so the run reads as a checklist.
"""

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

import oracle
from feaso.calculators import (
    DECOMPOSE,
    SUITABLE,
    TOO_FAST,
    BenefitModel,
    CostModel,
    RiskItem,
    SoftwareItem,
    contingency_required,
    coverage_effort_multiplier,
    expert_time_band,
    format_gbp,
    interface_effort_fraction,
    payback,
    round_cost,
)
from feaso.cli import main
from feaso.engine import Derivation, combine_parallel
from feaso.kb import bundled_kb_text, fixture, load_bundled_kb
from feaso.kbdsl import parse_kb, serialize_kb
from feaso.service import create_app
from feaso.session import Session, run_assessment

KB = load_bundled_kb()
TOL = 1e-9


def fixture_session(name: str) -> Session:
    session = Session(KB)
    for attr, ans in fixture(name, KB).answers.items():
        session.answer(attr, ans.value, ans.cf)
    return session


def ok(line: str) -> None:
    print(f"PASS {line}")


def test_a1_icl_cost_benefit_regression():
    """ICL coating-plant case: £30,000 build, payback about three months."""
    start = time.perf_counter()
    cost = CostModel(
        dev_effort_months=6,
        salary_rate=50_000,
        software=(SoftwareItem("hardware and software", 5_000),),
        kb_maintenance_annual=5_000,
    )
    benefit = BenefitModel(staff_savings=40_000, quality_savings=100_000)

    assert cost.initial_cost() == 30_000.0
    result = payback(cost, benefit)
    assert result.months == pytest.approx(2.67, abs=0.01)
    assert "≈3 months" in result.describe()
    elapsed = time.perf_counter() - start
    assert elapsed < 0.05, f"cost model took {elapsed:.3f}s; expected milliseconds"
    ok("[1/9] icl cost regression: £30,000 build, payback 2.67 → ≈3 months")


def test_a2_thyroid_cost_benefit_regression():
    """Thyroid assay case: £55,000 build, £8,500 (shown £9,000) running, payback under 2 months."""
    cost = CostModel(
        dev_effort_months=9,
        salary_rate=60_000,
        software=(SoftwareItem("assay software", 16_000, currency="usd"),),
        hardware_cost=3_000,
        hardware_replacement_years=3,
        kb_maintenance_annual=7_500,
        currency_rates={"gbp": 1.0, "usd": 1 / 2.2857},
    )
    assert cost.initial_cost() == pytest.approx(55_000, abs=100)
    assert cost.annual_cost() == pytest.approx(8_500, abs=100)
    assert format_gbp(round_cost(cost.annual_cost())) == "£9,000"

    result = payback(cost, BenefitModel(staff_savings=600_000))
    assert result.months < 2
    assert f"{result.months:.2f}" == "1.12"
    ok("[2/9] thyroid cost regression: £55,000 build, £9,000/yr shown, payback 1.12 months")


def test_a3_case_study_verdict_regression():
    """The three recorded consultations land on their historical verdicts."""
    thyroid = run_assessment(fixture_session("thyroid"))
    assert thyroid.overall_verdict == "feasible_with_caveats"
    assert {c.symbol for c in thyroid.caveats} >= {
        "interfaces",
        "safety_criticality",
        "user_acceptance",
    }

    bank = run_assessment(fixture_session("savings_bank"))
    assert bank.overall_verdict == "infeasible"
    org = next(d for d in bank.dimensions if d.dimension == "organisational")
    assert org.verdict == "infeasible"
    assert org.cf == 1.0
    assert "org_unplanned_upheaval" in bank.rule_citations

    icl = run_assessment(fixture_session("icl"))
    assert icl.overall_verdict == "feasible"
    ok("[3/9] case-study verdicts: thyroid caveated, savings bank infeasible, icl feasible")


def test_a4_heuristic_bands_exact():
    """Sizing heuristics return their published band values exactly."""
    assert expert_time_band(2) == TOO_FAST
    assert expert_time_band(45) == SUITABLE
    assert expert_time_band(90) == DECOMPOSE

    assert coverage_effort_multiplier(0.8) == 1.0
    assert coverage_effort_multiplier(1.0) == 5.0

    assert interface_effort_fraction("embedded_or_simple") == (0.10, 0.15)
    assert interface_effort_fraction("multiple_or_impressive") == (0.30, 0.50)

    two_serious = [
        RiskItem("expert leaves", "medium", "high"),
        RiskItem("scope creep", "medium", "medium"),
    ]
    one_serious = [
        RiskItem("expert leaves", "medium", "high"),
        RiskItem("scope creep", "low", "high"),
    ]
    assert contingency_required(two_serious) is True
    assert contingency_required(one_serious) is False
    ok("[4/9] heuristic bands exact: time bands, coverage multiplier, interface fractions, contingency")


def test_a5_engine_matches_forward_chaining_oracle():
    """Backchained results equal an independent forward-chaining fixpoint.

    500 generated knowledge bases (up to 8 attributes, 12 rules), each with
    a random full answer set, every attribute checked as a goal.
    """
    start = time.perf_counter()
    checked = 0
    for seed in range(500):
        kb = oracle.random_kb(seed)
        rng = random.Random(seed * 7919 + 13)
        answers = oracle.random_answers(kb, rng)
        derivation = Derivation(kb, answers, tuple(kb.attributes))
        expected = oracle.forward_fixpoint(kb, answers)
        for attr in kb.attributes:
            got = derivation.facts_for(attr)
            want = expected.get(attr, {})
            assert set(got) == set(want), f"seed {seed}: {attr} values diverge"
            for value, fact in got.items():
                assert abs(fact.cf - want[value]) <= TOL, (
                    f"seed {seed}: {attr}={value!r} engine {fact.cf} oracle {want[value]}"
                )
                checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60, f"oracle comparison took {elapsed:.1f}s"
    ok(f"[5/9] oracle equivalence: 500 KBs, {checked} facts matched within 1e-9 in {elapsed:.1f}s")


def test_a6_cf_algebra_properties():
    """Evidence-combination algebra behaves over 10,000+ random cases."""
    rng = random.Random(20260818)
    pairs = [(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(10_000)]
    for a, b in pairs:
        ab = combine_parallel(a, b)
        assert abs(ab - combine_parallel(b, a)) <= TOL  # commutative
        assert -1.0 <= ab <= 1.0  # closed over the range
        assert abs(combine_parallel(a, 0.0) - a) <= TOL  # zero is identity
        assert combine_parallel(1.0, min(b, 0.999)) == 1.0  # certainty absorbs

    same_sign = 0
    while same_sign < 10_000:
        sign = 1 if rng.random() < 0.5 else -1
        a, b, c = (sign * rng.random() for _ in range(3))
        left = combine_parallel(combine_parallel(a, b), c)
        right = combine_parallel(a, combine_parallel(b, c))
        assert abs(left - right) <= TOL, f"associativity broke at {(a, b, c)}"
        same_sign += 1
    ok("[6/9] cf algebra: 10,000 pairs and 10,000 same-sign triples within 1e-9")


def test_a7_dsl_round_trip():
    """parse ∘ serialize is the identity, and serialization is stable."""
    shipped = parse_kb(bundled_kb_text())
    assert shipped.kb is not None
    first = serialize_kb(shipped.kb)
    reparsed = parse_kb(first)
    assert reparsed.kb == shipped.kb
    assert serialize_kb(reparsed.kb) == first

    for seed in range(500):
        kb = oracle.random_kb(seed)
        text = serialize_kb(kb)
        result = parse_kb(text)
        assert result.kb == kb, f"seed {seed}: structural identity lost"
        assert serialize_kb(result.kb) == text, f"seed {seed}: serialization unstable"
    ok("[7/9] dsl round-trip: shipped KB and 500 generated KBs, byte-stable")


def _random_answer_set(rng: random.Random) -> dict[str, tuple[object, float]]:
    answers: dict[str, tuple[object, float]] = {}
    for attr, decl in KB.attributes.items():
        if not decl.askable:
            continue
        if rng.random() < 0.1:
            answers[attr] = (None, 0.0)
            continue
        if decl.type == "bool":
            value: object = rng.random() < 0.5
        elif decl.type == "enum":
            value = rng.choice(decl.values)
        elif attr == "target_coverage":
            value = round(rng.uniform(0.8, 1.0), 2)
        else:
            value = round(rng.uniform(0.0, 120.0), 1)
        answers[attr] = (value, rng.uniform(0.25, 1.0))
    return answers


SHOWSTOPPERS = (
    {"common_sense_required": True},
    {"major_org_change": True, "change_independently_planned": False},
    {"task_will_continue": False},
)


def test_a8_showstopper_dominance():
    """Any of the three showstoppers forces infeasible, whatever else is said."""
    rng = random.Random(97)
    runs = 0
    for i in range(1_002):
        session = Session(KB)
        for attr, (value, cf) in _random_answer_set(rng).items():
            session.answer(attr, value, cf)
        for attr, value in SHOWSTOPPERS[i % 3].items():
            session.answer(attr, value, 1.0)
        assessment = run_assessment(session)
        assert assessment.overall_verdict == "infeasible", (
            f"set {i}: showstopper {SHOWSTOPPERS[i % 3]} gave {assessment.overall_verdict}"
        )
        assert assessment.overall_cf == 1.0
        runs += 1
    ok(f"[8/9] showstopper dominance: {runs} randomized answer sets all infeasible")


def test_a9_cli_service_parity_and_restart(tmp_path, capsys):
    """One consultation, three routes, one answer."""
    rc = main(["assess", "--fixture", "thyroid", "--report", "json"])
    assert rc == 0
    cli_payload = json.loads(capsys.readouterr().out)

    store = str(tmp_path / "sessions")
    with TestClient(create_app(KB, store_dir=store)) as client:
        sid = client.post("/sessions", json={"fixture": "thyroid"}).json()["session_id"]
        http_payload = client.get(f"/sessions/{sid}/report").json()
    assert http_payload == cli_payload
    assert http_payload["verdict"] == "feasible_with_caveats"

    # crash-restart: interrupt a consultation mid-way, restart the service,
    # and finish it; the outcome matches the uninterrupted run.
    answers = list(fixture("thyroid", KB).answers.items())
    with TestClient(create_app(KB, store_dir=store)) as before:
        sid = before.post("/sessions").json()["session_id"]
        for attr, ans in answers[:20]:
            response = before.post(
                f"/sessions/{sid}/answers",
                json={"attribute": attr, "value": ans.value, "cf": ans.cf},
            )
            assert response.status_code == 200
        state_before = before.get(f"/sessions/{sid}").json()

    with TestClient(create_app(KB, store_dir=store)) as after:
        assert after.get(f"/sessions/{sid}").json() == state_before
        for attr, ans in answers[20:]:
            response = after.post(
                f"/sessions/{sid}/answers",
                json={"attribute": attr, "value": ans.value, "cf": ans.cf},
            )
            assert response.status_code == 200
        resumed_payload = after.get(f"/sessions/{sid}/report").json()
    assert resumed_payload == http_payload
    ok("[9/9] parity: CLI json == HTTP json; restart mid-consultation loses nothing")
