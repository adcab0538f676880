import random
from pathlib import Path

import pytest

from lexasp.kb import load_kb_dir
from lexasp.syntax import (
    Atom,
    AtomLiteral,
    ChoiceElement,
    ChoiceHead,
    Comparison,
    Program,
    Rule,
    Term,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def kb():
    return load_kb_dir()


# --- random program generators (shared by the property suites) ---------------

_NULLARY = [Atom(name) for name in "abcdefghijkl"]


def random_ground_program(rng: random.Random, max_atoms: int = 12, max_rules: int = 15) -> Program:
    """Ground programs over nullary atoms: facts, normal rules, denials and
    bounded choice rules with negation in bodies."""
    atoms = _NULLARY[: rng.randint(2, max_atoms)]
    rules = []
    for i in range(rng.randint(1, max_rules)):
        body = tuple(
            AtomLiteral(a, rng.random() < 0.4)
            for a in rng.sample(atoms, rng.randint(0, min(3, len(atoms))))
        )
        roll = rng.random()
        if roll < 0.2:
            rules.append(Rule(f"r{i}", rng.choice(atoms)))
        elif roll < 0.6:
            rules.append(Rule(f"r{i}", rng.choice(atoms), body))
        elif roll < 0.78 and body:
            rules.append(Rule(f"r{i}", None, body))
        else:
            elements = tuple(
                ChoiceElement(a) for a in rng.sample(atoms, rng.randint(1, min(3, len(atoms))))
            )
            lb = rng.randint(0, len(elements))
            ub = rng.choice([None, rng.randint(lb, len(elements))])
            rules.append(Rule(f"r{i}", ChoiceHead(lb, ub, elements), body))
    return Program(tuple(rules))


_PREDS = [("p", 1), ("q", 1), ("r", 2), ("s", 0)]
_OPS = ("=", "!=", "<", "<=", ">", ">=")


def random_safe_program(rng: random.Random, max_consts: int = 3, max_preds: int = 4) -> Program:
    """Small safe non-ground programs: ground facts plus rules whose first
    body literal binds every variable, with optional comparisons, negation
    and choice heads."""
    consts = [Term.const(c) for c in ("a", "b", "c")[: rng.randint(1, max_consts)]]
    preds = _PREDS[: rng.randint(2, max_preds)]
    with_args = [p for p in preds if p[1] >= 1]
    rules = []
    rid = 0

    def fresh_id() -> str:
        nonlocal rid
        rid += 1
        return f"g{rid}"

    for _ in range(rng.randint(1, 4)):
        name, ar = rng.choice(preds)
        rules.append(Rule(fresh_id(), Atom(name, tuple(rng.choice(consts) for _ in range(ar)))))

    for _ in range(rng.randint(1, 5)):
        n_vars = rng.randint(0, 2) if with_args else 0
        vars_ = [Term.var(v) for v in ("X", "Y")[:n_vars]]
        terms = vars_ + consts

        def rand_atom(allowed_arity_min=0):
            name, ar = rng.choice([p for p in preds if p[1] >= allowed_arity_min])
            return Atom(name, tuple(rng.choice(terms) for _ in range(ar)))

        body: list = []
        if vars_:
            # bind every variable with one positive literal
            if len(vars_) == 2 and ("r", 2) in preds:
                body.append(AtomLiteral(Atom("r", (vars_[0], vars_[1]))))
            else:
                for v in vars_:
                    name, ar = rng.choice(with_args)
                    args = [v] + [rng.choice(terms) for _ in range(ar - 1)]
                    body.append(AtomLiteral(Atom(name, tuple(args))))
        for _ in range(rng.randint(0, 2)):
            body.append(AtomLiteral(rand_atom(), negated=rng.random() < 0.5))
        if vars_ and rng.random() < 0.4:
            body.append(Comparison(rng.choice(vars_), rng.choice(_OPS), rng.choice(terms)))
        roll = rng.random()
        if roll < 0.6 or not body:
            head = rand_atom()
            rules.append(Rule(fresh_id(), head, tuple(body)))
        elif roll < 0.8:
            rules.append(Rule(fresh_id(), None, tuple(body)))
        else:
            elements = tuple(ChoiceElement(rand_atom()) for _ in range(rng.randint(1, 2)))
            lb = rng.randint(0, len(elements))
            ub = rng.choice([None, len(elements)])
            rules.append(Rule(fresh_id(), ChoiceHead(lb, ub, elements), tuple(body)))
    return Program(tuple(rules))
