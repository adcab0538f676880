"""lexasp: encode criminal-code articles as answer-set programs, enumerate
verdict scenarios, explain them, detect contradictions between rulings, and
learn new rules from prior judgments."""

from .syntax import (
    Atom,
    AtomLiteral,
    ChoiceElement,
    ChoiceHead,
    Comparison,
    ExampleSpec,
    LearningTask,
    ModeDecl,
    Program,
    Rule,
    Term,
    canonical_text,
    check_safety,
    program_text,
)
from .parser import parse_ground_atom, parse_learning_task, parse_program, parse_statement
from .ground import GroundProgram, expand_conditional_choice, ground_program
from .solve import (
    StableModel,
    brave_entails,
    cautious_entails,
    enumerate_stable_models,
    exhaustive_stable_models,
    is_stable,
    least_model,
    reduct,
)
from .explain import (
    ExplanationDag,
    JustificationTree,
    export_dag,
    justification_tree,
    parse_dag,
    support_dag,
)
from .learn import (
    Hypothesis,
    HypothesisSpace,
    cautious_learn,
    covers,
    exhaustive_learn,
    generate_hypothesis_space,
    learn_optimal,
    run_learning,
)
from .kb import (
    ContradictionFinding,
    JudgmentRecord,
    KnowledgeBase,
    detect_contradictions,
    integrate_learned_rule,
    load_kb,
    load_kb_dir,
    resolve_priority,
)
from .verify import (
    RefinementReport,
    add_evidence_constraint,
    check_expected_model,
    check_fact_consistency,
    corpus_gate,
    explore_subsets,
    verify_case,
)

__version__ = "0.1.0"
