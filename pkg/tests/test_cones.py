import numpy as np
import pytest

from mapcones import cones, linalg, superop
from mapcones.cones import (
    MEMBER,
    NOT_MEMBER,
    UNKNOWN,
    ConeGrammarError,
    MemberConfig,
    dual_expr,
    format_cone,
    includes,
    member,
    normalize,
    pair,
    parse_cone,
    recheck,
    sample_generators,
    witness_search,
)
from mapcones.family import PhiLambdaSpec, build
from mapcones.superop import ad_map, identity_map, trace_map, transpose_map

RNG = np.random.default_rng(11)
CFG = MemberConfig(samples=200, seed=0)


# ---------------------------------------------------------------------------
# grammar / normalization / duality rewriting
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text,pretty", [
    ("P", "P"),
    ("SP", "SP"),
    ("CP", "CP"),
    ("Pk(2)", "Pk(2)"),
    ("SPk(2)", "SPk(2)"),
    ("t(CP)", "t(CP)"),
    ("meet(P, t(CP))", "meet(P,t(CP))"),
    ("join(CP, t(CP))", "join(CP,t(CP))"),
])
def test_parse_format_roundtrip(text, pretty):
    assert format_cone(parse_cone(text)) == pretty


@pytest.mark.parametrize("bad", [
    "", "P(", "Pk()", "Pk(0)", "Pk(x)", "meet(P)", "join(P,Q)", "dual",
    "P extra", "t(t", "Qk(2)",
])
def test_grammar_errors(bad):
    with pytest.raises(ConeGrammarError):
        parse_cone(bad)


def test_normalize_collapses():
    assert format_cone(normalize(parse_cone("Pk(1)"), 3, 3)) == "P"
    assert format_cone(normalize(parse_cone("SPk(1)"), 3, 3)) == "SP"
    assert format_cone(normalize(parse_cone("Pk(3)"), 3, 3)) == "CP"
    assert format_cone(normalize(parse_cone("SPk(2)"), 2, 3)) == "CP"
    assert format_cone(normalize(parse_cone("t(t(CP))"), 3, 3)) == "CP"
    assert format_cone(normalize(parse_cone("t(P)"), 3, 3)) == "P"
    assert format_cone(normalize(parse_cone("t(SP)"), 3, 3)) == "SP"


def test_normalize_rejects_out_of_range_k():
    with pytest.raises(ConeGrammarError):
        normalize(parse_cone("Pk(4)"), 3, 3)


def test_dual_structural_rules():
    def dual_text(text, m=3, n=3):
        return format_cone(dual_expr(normalize(parse_cone(text), m, n)))

    assert dual_text("P") == "SP"
    assert dual_text("SP") == "P"
    assert dual_text("CP") == "CP"
    assert dual_text("Pk(2)") == "SPk(2)"
    assert dual_text("SPk(2)") == "Pk(2)"
    assert dual_text("t(CP)") == "t(CP)"
    assert dual_text("meet(CP, t(CP))") == "join(CP,t(CP))"
    assert dual_text("dual(dual(P))") == "SP"
    assert dual_text("dual(P)") == "P"


def test_normalize_eliminates_dual_nodes():
    expr = normalize(parse_cone("dual(meet(Pk(2), t(CP)))"), 3, 3)
    assert format_cone(expr) == "join(SPk(2),t(CP))"


def test_includes_chain():
    m = n = 3
    def nc(text):
        return normalize(parse_cone(text), m, n)
    assert includes(nc("P"), nc("Pk(2)"))
    assert includes(nc("Pk(2)"), nc("CP"))
    assert includes(nc("CP"), nc("SPk(2)"))
    assert includes(nc("SPk(2)"), nc("SP"))
    assert not includes(nc("CP"), nc("P"))


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------

def test_pair_requires_hp():
    phi = superop.random_map(2, 2, RNG)
    phi = superop.from_choi(phi.choi + 1j * np.diag([1.0, 0, 0, 0]), 2, 2)
    with pytest.raises(ValueError):
        pair(phi, identity_map(2))


def test_pair_trace_against_identity():
    # <Tr(.)I, id> = Tr over the Choi pairing = n
    n = 3
    assert abs(pair(trace_map(n), identity_map(n)) - n) < 1e-12


# ---------------------------------------------------------------------------
# membership verdicts
# ---------------------------------------------------------------------------

def test_identity_is_cp_member_with_kraus_certificate():
    verdict = member(identity_map(3), normalize(parse_cone("CP"), 3, 3), CFG)
    assert verdict.status == MEMBER
    assert recheck(identity_map(3), verdict)


def test_transpose_not_cp_with_eigen_witness():
    t = transpose_map(2)
    verdict = member(t, normalize(parse_cone("CP"), 2, 2), CFG)
    assert verdict.status == NOT_MEMBER
    assert verdict.witness is not None
    assert recheck(t, verdict)


def test_transpose_is_positive():
    t = transpose_map(3)
    verdict = member(t, normalize(parse_cone("P"), 3, 3), CFG)
    assert verdict.status == MEMBER
    assert recheck(t, verdict)


def test_random_kraus_maps_are_cp():
    for _ in range(10):
        phi = superop.random_cp_map(2, 3, RNG)
        verdict = member(phi, normalize(parse_cone("CP"), 2, 3), CFG)
        assert verdict.status == MEMBER
        assert recheck(phi, verdict)


def test_rank_one_ad_is_sp_member():
    v = np.outer(linalg.random_complex((3,), RNG), linalg.random_complex((3,), RNG))
    phi = ad_map(v)
    verdict = member(phi, normalize(parse_cone("SP"), 3, 3), CFG)
    assert verdict.status == MEMBER
    assert recheck(phi, verdict)


def test_family_map_k_positivity_window():
    v = np.eye(3, dtype=complex)
    expr = normalize(parse_cone("Pk(2)"), 3, 3)
    below = build(PhiLambdaSpec(v, 0.4))   # threshold is 1/2
    above = build(PhiLambdaSpec(v, 0.6))
    vb = member(below, expr, CFG)
    va = member(above, expr, CFG)
    assert vb.status == MEMBER
    assert va.status == NOT_MEMBER
    assert recheck(below, vb)
    assert recheck(above, va)


def test_twirl_membership():
    # t(CP) holds exactly the maps Phi with Phi . t completely positive
    t = transpose_map(3)
    expr = normalize(parse_cone("t(CP)"), 3, 3)
    verdict = member(t, expr, CFG)
    assert verdict.status == MEMBER
    assert recheck(t, verdict)
    assert member(identity_map(3), expr, CFG).status == NOT_MEMBER


def test_meet_and_join_membership():
    expr_meet = normalize(parse_cone("meet(CP, t(CP))"), 2, 2)
    expr_join = normalize(parse_cone("join(CP, t(CP))"), 2, 2)
    tr = trace_map(2)  # Tr(.)I is CP and equal to its own twirl
    vm = member(tr, expr_meet, CFG)
    assert vm.status == MEMBER
    assert recheck(tr, vm)
    # identity is CP hence in the join, but not in the meet
    vj = member(identity_map(2), expr_join, CFG)
    assert vj.status == MEMBER
    assert recheck(identity_map(2), vj)
    assert member(identity_map(2), expr_meet, CFG).status == NOT_MEMBER


def test_member_rejects_non_hp_map():
    phi = superop.random_map(2, 2, RNG)
    phi = superop.from_choi(phi.choi + 1j * np.diag([1.0, 0, 0, 0]), 2, 2)
    with pytest.raises(ValueError):
        member(phi, normalize(parse_cone("CP"), 2, 2), CFG)


# ---------------------------------------------------------------------------
# generators and witness search
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["SP", "SPk(2)", "CP", "t(CP)"])
def test_sampled_generators_verifiably_members(text):
    m = n = 3
    expr = normalize(parse_cone(text), m, n)
    gens = sample_generators(expr, m, n, 12, seed=5)
    assert gens
    for g in gens:
        assert member(g, expr, MemberConfig(samples=100, seed=1)).status == MEMBER


@pytest.mark.parametrize("text", ["SP", "SPk(2)", "CP", "t(CP)", "join(CP,t(CP))",
                                  "meet(CP,t(CP))", "Pk(2)"])
def test_sampled_generators_carry_sound_certificates(text):
    m = n = 3
    expr = normalize(parse_cone(text), m, n)
    rng = np.random.default_rng(5)
    pairs = cones._sample_with_certs(expr, m, n, 12, rng)
    assert pairs
    for g, cert in pairs:
        assert recheck(g, cones.Verdict(MEMBER, certificate=cert))


def test_generator_sampling_deterministic():
    expr = normalize(parse_cone("SPk(2)"), 3, 3)
    a = sample_generators(expr, 3, 3, 8, seed=3)
    b = sample_generators(expr, 3, 3, 8, seed=3)
    assert all(x == y for x, y in zip(a, b))


def test_witness_search_finds_cp_witness():
    t = transpose_map(2)
    found = witness_search(t, normalize(parse_cone("CP"), 2, 2), CFG)
    assert found is not None
    psi, value, cert = found
    assert value < -1e-6
    assert abs(pair(psi, t) - value) < 1e-9


def test_witness_search_on_member_returns_none():
    phi = superop.random_cp_map(2, 2, RNG)
    assert witness_search(phi, normalize(parse_cone("CP"), 2, 2), CFG) is None


def test_k_positivity_witness_respects_schmidt_rank():
    # the family map at lambda = 0.6 is positive but not 2-positive on C^3
    v = np.eye(3, dtype=complex)
    above = build(PhiLambdaSpec(v, 0.6))
    found = witness_search(above, normalize(parse_cone("Pk(2)"), 3, 3), CFG)
    assert found is not None
    psi, value, cert = found
    assert value < -1e-6
    ops = cert["ops"]
    assert all(np.linalg.matrix_rank(np.asarray(op), tol=1e-8) <= 2 for op in ops)


def test_recheck_rejects_tampered_verdict():
    phi = identity_map(2)
    verdict = member(phi, normalize(parse_cone("CP"), 2, 2), CFG)
    assert verdict.status == MEMBER
    other = transpose_map(2)
    assert not recheck(other, verdict)
