"""Hand-traced fixtures shared by unit and acceptance tests."""

# text -> expected token texts, traced by hand against the split/strip/bracket rules
TOKENIZER_CASES = [
    ("(IL-2)", ["(", "IL-2", ")"]),
    ("hello world", ["hello", "world"]),
    ("in ND3.", ["in", "ND3", "."]),
    ("c.399_402del", ["c.399", "402del"]),
    ("p.R97G,", ["p.R97G", ","]),
    ("rs2234671:", ["rs2234671", ":"]),
    ("end.).'", ["end.)", ".", "'"]),
    ("T10191C(P.S45P)", ["T10191C(P.S45P)"]),
    ("(p.Arg97Gly).", ["(", "p.Arg97Gly", ")", "."]),
    ("[c.1234A>G]", ["[", "c.1234A>G", "]"]),
    ("()", ["()"]),
    ("(", ["("]),
    ("a;b/c", ["a", "b", "c"]),
    ("x=y?z!", ["x", "y", "z"]),
    ("...", [".", ".", "."]),
    ('"quoted"', ["quoted"]),
    ("{IL-2}", ["IL-2"]),
    ("((IL-2))", ["(", "(IL-2)", ")"]),
    ("IL-2).", ["IL-2)", "."]),
    ("c.G1138A',", ["c.G1138A", "'", ","]),
    ("1,2", ["1,2"]),
    ("E545K/H1047R", ["E545K", "H1047R"]),
    ("α-helix (L858R)", ["α-helix", "(", "L858R", ")"]),
    ("#&$*~\\", []),
    ("We identified T10191C(P.S45P) in ND3. (IL-2), c.399_402del",
     ["We", "identified", "T10191C(P.S45P)", "in", "ND3", ".", "(", "IL-2", ")", ",", "c.399", "402del"]),
]

# (gold tag names per sentence, predicted tag names per sentence,
#  expected {type: (tp, fp, fn)} for types with any count, expected macro F1)
EVAL_FIXTURES = [
    ("all O", [["O", "O"]], [["O", "O"]], {}, 1.0),
    ("exact DNA", [["B-DNAMutation", "I-DNAMutation", "O"]], [["B-DNAMutation", "I-DNAMutation", "O"]],
     {"DNAMutation": (1, 0, 0)}, 1.0),
    ("predicted too short", [["B-DNAMutation", "I-DNAMutation"]], [["B-DNAMutation", "O"]],
     {"DNAMutation": (0, 1, 1)}, 0.0),
    ("predicted too long", [["B-DNAMutation", "O"]], [["B-DNAMutation", "I-DNAMutation"]],
     {"DNAMutation": (0, 1, 1)}, 0.0),
    ("type error", [["B-DNAMutation"]], [["B-ProteinMutation"]],
     {"DNAMutation": (0, 0, 1), "ProteinMutation": (0, 1, 0)}, 0.0),
    ("orphan I matches", [["O", "B-DNAMutation", "I-DNAMutation"]], [["O", "I-DNAMutation", "I-DNAMutation"]],
     {"DNAMutation": (1, 0, 0)}, 1.0),
    ("orphan I other type", [["B-DNAMutation", "I-DNAMutation"]], [["B-DNAMutation", "I-ProteinMutation"]],
     {"DNAMutation": (0, 1, 1), "ProteinMutation": (0, 1, 0)}, 0.0),
    ("missed SNP", [["B-SNP", "O"]], [["O", "O"]], {"SNP": (0, 0, 1)}, 0.0),
    ("spurious SNP", [["O"]], [["B-SNP"]], {"SNP": (0, 1, 0)}, 0.0),
    ("adjacent SNPs", [["B-SNP", "B-SNP"]], [["B-SNP", "B-SNP"]], {"SNP": (2, 0, 0)}, 1.0),
    ("two merged into one", [["B-ProteinMutation", "B-ProteinMutation"]],
     [["B-ProteinMutation", "I-ProteinMutation"]], {"ProteinMutation": (0, 1, 2)}, 0.0),
    ("one split into two", [["B-ProteinMutation", "I-ProteinMutation", "I-ProteinMutation"]],
     [["B-ProteinMutation", "I-ProteinMutation", "B-ProteinMutation"]], {"ProteinMutation": (0, 2, 1)}, 0.0),
    ("two sentences", [["B-DNAMutation"], ["B-DNAMutation"]], [["B-DNAMutation"], ["O"]],
     {"DNAMutation": (1, 0, 1)}, 2 / 3),
    ("same offsets in different sentences", [["B-SNP"], ["O"]], [["O"], ["B-SNP"]], {"SNP": (0, 1, 1)}, 0.0),
    ("all three types",
     [["B-DNAMutation", "O", "B-ProteinMutation", "I-ProteinMutation", "O", "B-SNP"]],
     [["B-DNAMutation", "O", "B-ProteinMutation", "I-ProteinMutation", "O", "B-SNP"]],
     {"DNAMutation": (1, 0, 0), "ProteinMutation": (1, 0, 0), "SNP": (1, 0, 0)}, 1.0),
    ("orphan I on both sides", [["I-ProteinMutation", "I-ProteinMutation"]],
     [["B-ProteinMutation", "I-ProteinMutation"]], {"ProteinMutation": (1, 0, 0)}, 1.0),
    ("O gap then orphan I", [["B-DNAMutation", "I-DNAMutation", "O", "I-DNAMutation"]],
     [["B-DNAMutation", "I-DNAMutation", "O", "I-DNAMutation"]], {"DNAMutation": (2, 0, 0)}, 1.0),
    ("type switch mid-span", [["B-ProteinMutation", "I-ProteinMutation", "I-ProteinMutation"]],
     [["B-ProteinMutation", "I-DNAMutation", "I-ProteinMutation"]],
     {"ProteinMutation": (0, 2, 1), "DNAMutation": (0, 1, 0)}, 0.0),
    ("empty sentence", [[]], [[]], {}, 1.0),
    ("entity at end plus spurious", [["O", "O", "B-DNAMutation", "I-DNAMutation"]],
     [["B-SNP", "O", "B-DNAMutation", "I-DNAMutation"]], {"DNAMutation": (1, 0, 0), "SNP": (0, 1, 0)}, 0.5),
]
