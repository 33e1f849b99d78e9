"""organon: a small natural deduction kernel for reconstructions of ancient logic.

The pieces:

* ``logic``    sorted terms and formulas, substitution, alpha-equivalence, Skolem forms
* ``kernel``   Fitch-style proof checking against a theory of axioms, schemata and lemmas
* ``script``   the ``.anc`` proof-script language, with located diagnostics and a renderer
* ``oracle``   finite-model evaluation and entailment up to a domain bound
* ``stoic``    sequents, cut, indemonstrable schemata and a relevance check
* ``corpus``, ``mutate``, ``cli``   the bundled corpus, mutation testing, command line
"""

from .document import CheckedDocument, check_document, drop_axiom, load
from .kernel import (
    Block, BlockRef, CheckReport, Justification, Line, Proof, ProofRejected, Schema, Theory,
    check_proof, classify_proof, instantiate_schema, register_lemma,
)
from .logic import (
    And, App, Atom, Const, Exists, FALSUM, Forall, Implies, Not, Or, Signature, Var, alpha_eq,
    apply_subst, free_names, skolemize, well_sorted,
)
from .oracle import (
    Countermodel, Model, OracleBudgetExceeded, ValidUpTo, entails, entails_bruteforce, evaluate,
)
from .script import ParseError, parse_document, parse_formula, render_document
from .stoic import Sequent, check_derivation, cut, derivable, relevance_check

__version__ = "0.1.0"
