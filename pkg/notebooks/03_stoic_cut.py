"""
Sequents, cut and the missing weakening
=======================================
"""

from organon.logic import Atom
from organon.script import parse_document
from organon.stoic import Sequent, check_stoic_document, cut, derivable

A, B, C, D, E = (Atom(n, ()) for n in "ABCDE")

#%%
# Cutting D, E |- A into the first premise of A, B |- C
got = cut(Sequent((A, B), C), Sequent((D, E), A), 1)
print(got)

#%%
# The same step written as a script
script = """
sequent s1 : A, B |- C;
sequent s2 : D, E |- A;
derive third_thema {
  d1 : A, B |- C by base s1;
  d2 : D, E |- A by base s2;
  d3 : D, E, B |- C by cut d1, d2 @ 1;
}
"""
for report in check_stoic_document(parse_document(script)):
    print(report.name, report.verdict)

#%%
# Classically A, B |- A is fine, but nothing here can add an idle premise.
# The search is bounded, so this is a negative answer within its limits.
print(derivable({"id": Sequent((A,), A)}, Sequent((A, B), A)))
