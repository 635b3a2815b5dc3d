"""Template-generated variant sentences with gold character offsets.

Surface forms follow the usual notations: ``c.1234A>G`` and ``c.399_402del``
(DNA), ``p.Arg97Gly`` and ``p.R97G`` (protein), ``rs2234671`` (SNP).
The ``_`` in deletions is a split character, so those mentions come out as
two-token B-/I- spans.
"""

from __future__ import annotations

import numpy as np

from .corpus import AlignmentReport, AnnotatedSentence, OffsetSpan, align_spans
from .errors import DataError

GENES = ["BRCA1", "BRCA2", "TP53", "EGFR", "KRAS", "BRAF", "MTHFR", "APOE", "CFTR", "PTEN",
         "ND3", "COL1A1", "LDLR", "HFE", "ATM", "MLH1", "RET", "FBN1"]
DISEASES = ["breast cancer", "cystic fibrosis", "hypercholesterolemia", "colorectal carcinoma",
            "Parkinson disease", "Marfan syndrome", "hemochromatosis", "lung adenocarcinoma"]
BASES = "ACGT"
AA3 = ["Ala", "Arg", "Asn", "Asp", "Cys", "Gln", "Glu", "Gly", "His", "Ile",
       "Leu", "Lys", "Met", "Phe", "Pro", "Ser", "Thr", "Trp", "Tyr", "Val"]
AA1 = "ACDEFGHIKLMNPQRSTVWY"

# {E}: any entity, {S}: SNP, {B}: an entity safe inside brackets (no split character)
TEMPLATES = [
    "We identified {E} in the {GENE} gene.",
    "The {E} variant was associated with {DISEASE}.",
    "Patients carrying {E} and {E} showed reduced {GENE} activity.",
    "A novel mutation ({B}) was found in exon {N} of {GENE}.",
    "No association was found between {E} and {DISEASE} risk.",
    "The {GENE} polymorphism {S} was genotyped in {N} subjects.",
    "Carriers of {E} had higher {GENE} expression than controls.",
    "Sequencing of {GENE} revealed {E}, {E} and {E}.",
    "Expression of {GENE} was measured in {N} patients with {DISEASE}.",
    "In {N} families, {E} segregated with {DISEASE}.",
    "The frequency of {S} did not differ between cases and controls.",
    "Functional assays showed that {E} abolishes {GENE} binding.",
]


def _digits(gen, lo=1, hi=5):
    n = int(gen.integers(lo, hi + 1))
    first = str(int(gen.integers(1, 10)))
    return first + "".join(str(int(d)) for d in gen.integers(0, 10, size=n - 1))


def dna_mutation(gen) -> str:
    pos = _digits(gen)
    b1, b2 = gen.choice(list(BASES), size=2, replace=False)
    form = int(gen.integers(0, 3))
    if form == 0:
        return f"c.{pos}{b1}>{b2}"
    if form == 1:
        return f"c.{pos}_{int(pos) + int(gen.integers(1, 5))}del"
    return f"g.{pos}{b1}>{b2}"


def protein_mutation(gen) -> str:
    pos = _digits(gen, 1, 4)
    letters = AA3 if gen.integers(0, 2) == 0 else list(AA1)
    a, b = gen.choice(letters, size=2, replace=False)
    return f"p.{a}{pos}{b}"


def snp(gen) -> str:
    return "rs" + _digits(gen, 4, 9)


MAKERS = {"DNAMutation": dna_mutation, "ProteinMutation": protein_mutation, "SNP": snp}


def render(template: str, gen) -> tuple[str, list[tuple[int, int, str]]]:
    """Fill a template; returns the text and (start, end, type) entity offsets."""
    out, spans = [], []
    pos = 0
    i = 0
    while i < len(template):
        if template[i] == "{":
            j = template.index("}", i)
            slot = template[i + 1:j]
            if slot in ("E", "S", "B"):
                if slot == "S":
                    etype = "SNP"
                else:
                    etype = str(gen.choice(list(MAKERS)))
                surface = MAKERS[etype](gen)
                while slot == "B" and "_" in surface:
                    surface = MAKERS[etype](gen)
                spans.append((pos, pos + len(surface), etype))
            elif slot == "GENE":
                surface = str(gen.choice(GENES))
            elif slot == "DISEASE":
                surface = str(gen.choice(DISEASES))
            elif slot == "N":
                surface = str(int(gen.integers(2, 400)))
            else:
                raise ValueError(f"unknown template slot {slot}")
            out.append(surface)
            pos += len(surface)
            i = j + 1
        else:
            out.append(template[i])
            pos += 1
            i += 1
    return "".join(out), spans


def generate_documents(n: int, seed: int = 0, prefix: str = "syn"):
    """``n`` raw sentences with offset annotations, as (docs, spans)."""
    gen = np.random.default_rng(seed)
    docs, spans = [], []
    for k in range(n):
        text, ents = render(TEMPLATES[int(gen.integers(0, len(TEMPLATES)))], gen)
        doc_id = f"{prefix}{k:05d}"
        docs.append((doc_id, text))
        spans += [OffsetSpan(doc_id, s, e, t, text[s:e]) for s, e, t in ents]
    return docs, spans


def generate_corpus(n: int, seed: int = 0, prefix: str = "syn") -> list[AnnotatedSentence]:
    docs, spans = generate_documents(n, seed, prefix)
    by_doc: dict[str, list[OffsetSpan]] = {}
    for s in spans:
        by_doc.setdefault(s.doc_id, []).append(s)
    report = AlignmentReport()
    sents = [align_spans(text, by_doc.get(d, []), d, report=report) for d, text in docs]
    if report.misaligned:
        raise DataError(f"synthetic generator produced {len(report.misaligned)} misaligned spans")
    return sents
