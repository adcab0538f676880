import itertools
import random

import pytest

from lexasp.ground import GroundingError, GroundProgram, expand_conditional_choice, ground_program
from lexasp.parser import parse_program
from lexasp.solve import enumerate_stable_models
from lexasp.syntax import Atom, AtomLiteral, ChoiceElement, ChoiceHead, Rule, Term

from conftest import random_safe_program


def models_of(gp):
    return {m.atoms for m in enumerate_stable_models(gp)}


def test_single_constant_instantiation():
    gp = ground_program(parse_program("p(a). q(X) :- p(X)."))
    assert sorted(str(r) for r in gp.rules) == ["p(a).", "q(a) :- p(a)."]


def test_inequality_filters_diagonal():
    gp = ground_program(parse_program("p(a). p(b). r(X,Y) :- p(X), p(Y), X != Y."))
    r_rules = [r for r in gp.rules if r.is_normal and r.head.predicate == "r"]
    heads = {str(r.head) for r in r_rules}
    assert heads == {"r(a,b)", "r(b,a)"}
    # true comparisons are removed from bodies
    assert all(not r.comparisons() for r in gp.rules)


def test_adherence_choice_grounds_to_one_rule_with_four_elements():
    gp = ground_program(
        parse_program(
            """
level(1..4).
unknown_adherence("Veronica","earrings").
subtracted_obj("earrings").
victim("Veronica").
1{adherence(V,C,L):level(L)}1 :- unknown_adherence(V,C), subtracted_obj(C), victim(V).
"""
        )
    )
    choices = [r for r in gp.rules if r.is_choice]
    assert len(choices) == 1
    atoms = [str(e.atom) for e in choices[0].head.elements]
    assert atoms == [f'adherence("Veronica","earrings",{k})' for k in (1, 2, 3, 4)]
    assert choices[0].head.lb == 1 and choices[0].head.ub == 1


def test_no_variables_or_comparisons_survive_grounding():
    rng = random.Random(3)
    for _ in range(30):
        gp = ground_program(random_safe_program(rng))
        for r in gp.rules:
            assert r.is_ground
            assert not r.comparisons()
            for a in r.head_atoms() + r.positive_body() + r.negative_body():
                assert a in gp.herbrand_base


def test_expand_conditional_choice():
    head = ChoiceHead(
        1,
        1,
        (
            ChoiceElement(
                Atom("adh", (Term.var("V"), Term.var("L"))),
                (AtomLiteral(Atom("level", (Term.var("L"),))),),
            ),
        ),
    )
    facts = {Atom("level", (Term.integer(1),)), Atom("level", (Term.integer(2),))}
    elements = expand_conditional_choice(head, facts, sub={"V": Term.string("Veronica")})
    assert [str(e.atom) for e in elements] == ['adh("Veronica",1)', 'adh("Veronica",2)']
    assert elements[0].bindings == (("L", Term.integer(1)),)


def test_empty_condition_expansion_gives_empty_elements():
    head = ChoiceHead(0, None, (ChoiceElement(Atom("p", (Term.var("X"),)), (AtomLiteral(Atom("q", (Term.var("X"),))),)),))
    assert expand_conditional_choice(head, set()) == []
    # lb = 0 keeps the empty choice trivially satisfiable
    gp = ground_program(parse_program("t. 0{p(X):q(X)}. "))
    assert models_of(gp) == {frozenset({Atom("t")})}


def test_rule_defined_condition_predicate_rejected():
    program = parse_program("t. q(a) :- t. 1{p(X):q(X)}1.")
    with pytest.raises(GroundingError):
        ground_program(program)


def test_grounding_is_idempotent_on_ground_outputs():
    rng = random.Random(17)
    for _ in range(40):
        gp = ground_program(random_safe_program(rng))
        again = ground_program(GroundProgramAsProgram(gp))
        assert {str(r) for r in again.rules} == {str(r) for r in gp.rules}
        assert again.herbrand_base == gp.herbrand_base


def GroundProgramAsProgram(gp):
    from lexasp.syntax import Program

    rules = []
    seen = set()
    for i, r in enumerate(gp.rules):
        rid = r.id if r.id not in seen else f"{r.id}~{i}"
        seen.add(rid)
        rules.append(Rule(rid, r.head, r.body, r.annotation, r.origin))
    return Program(tuple(rules))


# --- model preservation against an independent naive instantiator -------------


def _naive_compare(left: Term, op: str, right: Term) -> bool:
    rank = {"int": 0, "const": 1, "string": 2}

    def key(t: Term):
        return (0, int(t.text), "") if t.kind == "int" else (rank[t.kind], 0, t.text)

    a, b = key(left), key(right)
    return {
        "=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
    }[op]


def naive_full_instantiation(program) -> GroundProgram:
    """Test oracle: substitute every combination of program constants for the
    global variables of each rule, filter by comparisons."""
    consts = set()
    for r in program.rules:
        atoms = list(r.head_atoms()) + list(r.positive_body()) + list(r.negative_body())
        for e in (r.head.elements if r.is_choice else ()):
            for c in e.condition:
                atoms.append(c.atom)
        for a in atoms:
            consts.update(t for t in a.args if t.is_ground)
        for c in r.comparisons():
            consts.update(t for t in (c.left, c.right) if t.is_ground)
    consts = sorted(consts, key=Term.order_key)
    facts = {r.head for r in program.rules if r.is_fact}

    out = []
    for r in program.rules:
        global_vars = sorted(
            {v for lit in r.body for v in lit.variables()}
            | ({v for v in r.head.variables()} if r.is_normal else set())
        )
        for combo in itertools.product(consts, repeat=len(global_vars)):
            sub = dict(zip(global_vars, combo))
            if not all(_naive_compare(c.substitute(sub).left, c.op, c.substitute(sub).right) for c in r.comparisons()):
                continue
            body = tuple(l.substitute(sub) for l in r.body if isinstance(l, AtomLiteral))
            if r.is_denial:
                out.append(Rule(f"{r.id}:{len(out)}", None, body))
            elif r.is_choice:
                elements, seen = [], set()
                for e in r.head.elements:
                    cond_vars = sorted({v for c in e.condition for v in c.atom.variables() if v not in sub})
                    for local_combo in itertools.product(consts, repeat=len(cond_vars)):
                        local = dict(sub, **dict(zip(cond_vars, local_combo)))
                        if all(c.atom.substitute(local) in facts for c in e.condition):
                            atom = e.atom.substitute(local)
                            if atom not in seen:
                                seen.add(atom)
                                elements.append(ChoiceElement(atom))
                ub = r.head.ub if r.head.ub is not None else len(elements)
                out.append(Rule(f"{r.id}:{len(out)}", ChoiceHead(r.head.lb, ub, tuple(elements)), body))
            else:
                out.append(Rule(f"{r.id}:{len(out)}", r.head.substitute(sub), body))
    base = set()
    for r in out:
        base.update(r.head_atoms())
        base.update(r.positive_body())
        base.update(r.negative_body())
    return GroundProgram(tuple(out), frozenset(base))


def test_model_preservation_against_naive_oracle():
    rng = random.Random(2024)
    for i in range(200):
        program = random_safe_program(rng)
        got = models_of(ground_program(program))
        expected = models_of(naive_full_instantiation(program))
        assert got == expected, f"program #{i}:\n{program}"
