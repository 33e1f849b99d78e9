"""
Darapti with and without existential import
===========================================

The ekthesis proof of Darapti leans on the axiom that something is S.  Drop
that axiom and both the kernel and the oracle object, each in its own way.
"""

from organon.corpus import corpus_dir
from organon.document import check_document, drop_axiom
from organon.oracle import entails
from organon.script import parse_document

doc = parse_document((corpus_dir() / "darapti_ekthesis.anc").read_text())
goal = doc.find("darapti").goal

with_import = check_document(doc)
print("with exS:", with_import.report("darapti").verdict)
print(entails(with_import.context["darapti"], goal, 3))

# drop_axiom also removes the line citing the axiom, so the failure shows up
# where that line was used
without = check_document(drop_axiom(doc, "exS"))
print("without exS:", without.report("darapti").failure)

# the oracle finds the smallest counterexample: one object, nothing is S
print(entails(without.context["darapti"], goal, 3))
