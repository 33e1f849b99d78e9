"""
Checking a conversion proof line by line
=========================================

Load the bundled conversion of the universal negative, check it, and look at
which hypothesis each rule discharged.
"""

from organon.corpus import corpus_dir
from organon.document import check_document
from organon.oracle import entails
from organon.script import parse_document, render_document

text = (corpus_dir() / "econv.anc").read_text()
doc = parse_document(text, "econv.anc")
checked = check_document(doc)

# one report per lemma or proof, in file order
for report in checked.reports:
    print(report.name, report.verdict, report.classification)

# the discharge table maps each hypothesis label to the line that closed it
econv = checked.report("econv")
for hyp, (line, rule) in sorted(econv.discharges.items()):
    print(f"  {hyp} closed at {line} by {rule}")

# the checker works on the parsed tree, so the rendered text reparses to the same thing
assert parse_document(render_document(doc)) == doc

# and the finite-model oracle agrees the goal holds in every model up to size 3
print(entails(checked.context["econv"], doc.find("econv").goal, 3))
