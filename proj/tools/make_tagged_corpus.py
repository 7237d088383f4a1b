#!/usr/bin/env python3
"""Writes data/tagged_corpus.txt: a small English-like POS-tagged corpus.

Sentences come from a hand-written probabilistic grammar over the 47-tag
inventory. Many word forms are shared between tags (run: NN/VB/VBP/VBN,
that: DT/IN/WDT, her: PRP/PRP$, ...) so a tagger has to use context.

    python3 tools/make_tagged_corpus.py [--seed 13] [--sentences 1400] [--out data/tagged_corpus.txt]
"""

import argparse
import pathlib
import random

LEX = {
    "DT": "the the the the a a a an this that these those some every no another each".split(),
    "NN": ("cat dog house run walk report plan market time book light record change work order cause city "
           "room letter story water price year government company film policy night morning table").split(),
    "NNS": ("cats dogs houses reports plans markets books records changes works orders cities rooms letters "
            "stories runs walks prices years companies films policies tables").split(),
    "NNP": "John Mary London Paris Smith Reuters Monday Tuesday March Chicago Ford Alice Boston".split(),
    "NNPS": "Americans Europeans Democrats Republicans Canadians Germans".split(),
    "VB": "run walk see make take find record change work order cause read write buy sell".split(),
    "VBD": "ran walked saw made took found recorded changed worked ordered caused read wrote bought sold".split(),
    "VBG": "running walking seeing making taking finding recording changing working buying selling".split(),
    "VBN": "run walked seen made taken found recorded changed worked ordered caused read written bought sold".split(),
    "VBP": "run walk see make take find record change work read write buy sell".split(),
    "VBZ": "runs walks sees makes takes finds records changes works orders causes reads writes buys sells".split(),
    "JJ": "big small old new red quiet early light fast open clear strong dark cold".split(),
    "JJR": "bigger smaller older newer faster earlier clearer stronger".split(),
    "JJS": "biggest smallest oldest newest fastest earliest strongest".split(),
    "RB": "quickly slowly never often very quite early fast still not always soon".split(),
    "RBR": "more later less harder".split(),
    "RBS": "most least".split(),
    "IN": "in on at with from of by after before under near during".split(),
    "CC": "and and but or yet".split(),
    "CD": "one two three 10 42 1990 2.5 seven 100 four".split(),
    "PRP_SUBJ": "he she it they we I you".split(),
    "PRP_OBJ": "him her it them us me you".split(),
    "PRP$": "his her its their our my your".split(),
    "MD": "will can could would should may must might".split(),
    "TO": ["to"],
    "EX": ["there"],
    "WDT": "which that".split(),
    "WP": "who what".split(),
    "WP$": ["whose"],
    "WRB": "when where how why".split(),
    "PDT": "all both half".split(),
    "POS": ["'s", "'s", "'"],
    "RP": "up out off down".split(),
    "UH": "oh yes well hey".split(),
    "FW": "de et bona fide per se".split(),
    "LS": "1 2 3 a b c".split(),
    "SYM": "% & + = *".split(),
}


class Gen:
    def __init__(self, rng):
        self.rng = rng
        self.out = []

    def w(self, tag, lex_key=None):
        self.out.append((self.rng.choice(LEX[lex_key or tag]), tag))

    def p(self, tok):
        self.out.append((tok, tok))

    def chance(self, prob):
        return self.rng.random() < prob

    # ---- phrases ----
    def adjs(self):
        r = self.rng.random()
        if r < 0.25:
            self.w("JJ")
        elif r < 0.30:
            self.w("JJR")
        elif r < 0.34:
            self.w("JJS")
        elif r < 0.40:
            self.w("RB")
            self.w("JJ")

    def noun_phrase(self, obj=False, depth=0):
        r = self.rng.random()
        if r < 0.14:
            self.w("PRP", "PRP_OBJ" if obj else "PRP_SUBJ")
            return
        if r < 0.24:
            self.w("NNP")
            if self.chance(0.3):
                self.w("NNP")
            return
        if r < 0.28:
            self.w("NNPS")
            return
        if r < 0.33:
            self.w("CD")
            self.w("NNS")
            return
        if r < 0.37:
            self.w("PDT")
            self.w("DT")
            self.w("NNS" if self.chance(0.6) else "NN")
            return
        if r < 0.42:
            self.w("NNP")
            self.w("POS")
            self.adjs()
            self.w("NN")
            return
        if r < 0.52:
            self.w("PRP$")
        else:
            self.w("DT")
        self.adjs()
        self.w("NN" if self.chance(0.65) else "NNS")
        if depth < 1 and self.chance(0.12):
            self.relative_clause()
        elif depth < 1 and self.chance(0.15):
            self.prep_phrase(depth + 1)

    def prep_phrase(self, depth=0):
        self.w("IN")
        self.noun_phrase(obj=True, depth=depth)

    def relative_clause(self):
        r = self.rng.random()
        if r < 0.45:
            self.w("WDT")
            self.w("VBZ" if self.chance(0.5) else "VBD")
            self.noun_phrase(obj=True, depth=1)
        elif r < 0.75:
            self.w("WP")
            self.w("VBD")
            self.noun_phrase(obj=True, depth=1)
        else:
            self.w("WP$")
            self.w("NN")
            self.w("VBD")

    def verb_phrase(self, form):
        # form: finite tag for the head verb
        if form == "MD":
            self.w("MD")
            if self.chance(0.15):
                self.w("RB")
            if self.chance(0.2):
                self.out.append(("have", "VB"))
                self.w("VBN")
            else:
                self.w("VB")
        elif form == "PERF":
            self.out.append(("has", "VBZ") if self.chance(0.5) else ("had", "VBD"))
            self.w("VBN")
        elif form == "PROG":
            self.out.append(("is", "VBZ") if self.chance(0.5) else ("was", "VBD"))
            self.w("VBG")
        elif form == "PASS":
            self.out.append(("was", "VBD") if self.chance(0.5) else ("is", "VBZ"))
            self.w("VBN")
            if self.chance(0.5):
                self.out.append(("by", "IN"))
                self.noun_phrase(obj=True, depth=1)
            return
        else:
            if self.chance(0.1):
                self.w("RB")
            self.w(form)
        if self.chance(0.12):
            self.w("RP")
        if self.chance(0.8):
            self.noun_phrase(obj=True)
        if self.chance(0.3):
            self.prep_phrase()
        if self.chance(0.15):
            self.w("RB")
        if self.chance(0.08):
            self.w("TO")
            self.w("VB")
            self.noun_phrase(obj=True, depth=1)
        if self.chance(0.05):
            self.w("RBR")
        elif self.chance(0.03):
            self.w("RBS")
            self.w("JJ")

    def clause(self):
        self.noun_phrase()
        form = self.rng.choices(["VBD", "VBZ", "VBP", "MD", "PERF", "PROG", "PASS"], [30, 20, 10, 14, 8, 8, 10])[0]
        if form == "VBP" and self.out and self.out[-1][1] not in ("NNS", "PRP", "NNPS"):
            form = "VBD"
        self.verb_phrase(form)

    def sentence(self):
        self.out = []
        r = self.rng.random()
        end = "."
        if r < 0.50:
            self.clause()
        elif r < 0.58:
            self.clause()
            self.p(",")
            self.w("CC")
            self.clause()
        elif r < 0.63:
            self.w("EX")
            self.out.append(("is", "VBZ") if self.chance(0.5) else ("was", "VBD"))
            self.noun_phrase(obj=True)
            self.prep_phrase()
        elif r < 0.69:
            self.w("WRB")
            self.out.append(("did", "VBD") if self.chance(0.5) else ("does", "VBZ"))
            self.noun_phrase()
            self.w("VB")
            self.noun_phrase(obj=True)
            end = "?"
        elif r < 0.73:
            self.w("UH")
            self.p(",")
            self.clause()
            end = "!"
        elif r < 0.77:
            self.w("IN")
            self.noun_phrase(obj=True)
            self.p(",")
            self.clause()
        elif r < 0.80:
            self.w("LS")
            self.p(")")
            self.noun_phrase()
            self.w("VBZ")
            self.noun_phrase(obj=True)
        elif r < 0.83:
            self.noun_phrase()
            self.w("VBD")
            self.p("$")
            self.w("CD")
            self.p("(")
            self.w("CD")
            self.w("SYM")
            self.p(")")
        elif r < 0.86:
            self.noun_phrase()
            self.w("VBD")
            self.p("``")
            self.clause()
            self.p("''")
        elif r < 0.89:
            self.noun_phrase()
            self.w("VBD")
            self.noun_phrase(obj=True)
            self.p(":")
            self.noun_phrase(obj=True)
            self.w("CC")
            self.noun_phrase(obj=True)
        elif r < 0.91:
            self.clause()
            self.p("...")
            end = None
        elif r < 0.93:
            self.noun_phrase()
            self.w("VBD")
            self.w("FW")
            self.w("FW")
        elif r < 0.96:
            self.noun_phrase()
            self.w("MD")
            self.out.append(("not", "RB"))
            self.w("VB")
            self.noun_phrase(obj=True)
        else:
            self.clause()
            self.out.append(("that", "IN"))
            self.clause()
        if end:
            self.p(end)
        tok, tag = self.out[0]
        if tag not in ("NNP", "NNPS", "CD", "LS", "``") and tok != "I":
            self.out[0] = (tok[:1].upper() + tok[1:], tag)
        return self.out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--sentences", type=int, default=1400)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "tagged_corpus.txt"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    gen = Gen(rng)
    lines = []
    for _ in range(args.sentences):
        sent = gen.sentence()
        lines.append(" ".join(f"{tok.replace('_', chr(92) + '_')}_{tag}" for tok, tag in sent))
    pathlib.Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
