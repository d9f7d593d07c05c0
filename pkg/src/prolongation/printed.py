"""Hand-transcribed reference formulas for the three built-in systems.

Formulas are stored as text in the DSL form syntax and parsed on demand.
SU(3) entries use the abbreviations ``W12m = (w1 - i*w2)``,
``W12p = (w1 + i*w2)`` and ``T45m = (theta4 - i*theta5)`` etc.

Each entry keeps the transcription exactly as printed, including the
places where it disagrees with the computed result; the comparison layer
in :mod:`prolongation.checks` turns those into discrepancy findings.
"""

from __future__ import annotations

import re

from .dsl import parse_form
from .exterior import Form, curv, exact, oneform, pfaff

_ABBREV = re.compile(r"\b([WT])(\d)(\d)([mp])\b")


def expand_abbreviations(text: str) -> str:
    def repl(m):
        base = "w" if m.group(1) == "W" else "theta"
        sign = "-" if m.group(4) == "m" else "+"
        return f"({base}{m.group(2)} {sign} i*{base}{m.group(3)})"
    return _ABBREV.sub(repl, text)


_GEN = re.compile(r"\b(w\d+|theta\d+|alpha\d+|beta\w+|dy\d+|dz\w+)\b")


def reference_context(text: str) -> dict:
    ctx = {}
    for name in _GEN.findall(text):
        if name.startswith("theta"):
            ctx[name] = curv(name)
        elif name.startswith(("alpha", "beta")):
            ctx[name] = pfaff(name)
        elif name.startswith("d"):
            ctx[name] = exact(name)
        else:
            ctx[name] = oneform(name)
    return ctx


def parse_reference(text: str) -> Form:
    text = expand_abbreviations(text)
    return parse_form(text, reference_context(text))


def parse_matrix(rows) -> list[list[Form]]:
    return [[parse_reference(e) for e in r] for r in rows]


SL2R = {
    "connection": [["w1", "w2"], ["w3", "-w1"]],
    "curvature": [["theta1", "theta2"], ["theta3", "-theta1"]],
    "dw": {
        "w1": "theta1 + w2^w3",
        "w2": "theta2 + 2*w1^w2",
        "w3": "theta3 - 2*w1^w3",
    },
    "alpha": {
        "alpha1": "dy1 - y1*w1 - y2*w2",
        "alpha2": "dy2 - y1*w3 + y2*w1",
    },
    "dalpha": {
        "alpha1": "w1^alpha1 + w2^alpha2 - y1*theta1 - y2*theta2",
        "alpha2": "-w1^alpha2 + w3^alpha1 + y2*theta1 - y1*theta3",
    },
    "ratios": {1: {"y3": ("y2", "y1")}, 2: {"y4": ("y1", "y2")}},
    "chart": {
        "alpha3": "dy3 - w3 + 2*y3*w1 + y3**2*w2",
        "alpha4": "dy4 - w2 - 2*y4*w1 + y4**2*w3",
    },
    "dchart": {
        "alpha3": "2*y3*theta1 + y3**2*theta2 - theta3 + 2*alpha3^(w1 + y3*w2)",
        "alpha4": "-2*y4*theta1 - theta2 + y4**2*theta3 + 2*alpha4^(-w1 + y4*w3)",
    },
    "sigma": {
        "sigma1": "w1 + y3*w2",
        "sigma2": "-w1 + y4*w3",
    },
    "dsigma": {
        "sigma1": "theta1 + y3*theta2 + alpha3^w2",
        "sigma2": "-theta1 + y3*theta2 + alpha4^w2",
    },
    "extension": {
        "alpha5": "dy5 - w1 - y3*w2",
        "alpha6": "dy6 + w1 - y4*w3",
        "alpha7": "dy7 - exp(-2*y5)*w2",
        "alpha8": "dy8 - exp(-2*y6)*w3",
    },
    "dextension": {
        "alpha5": "-theta1 - y3*theta3 - alpha3^w2",
        "alpha6": "theta1 - y4*theta3 - alpha4^w3",
        "alpha7": "2*exp(-2*y5)*alpha5^w2 - exp(-2*y5)*theta2",
        "alpha8": "2*exp(-2*y6)*alpha6^w3 - exp(-2*y6)*theta3",
    },
}


O3 = {
    "connection": [["0", "-w1", "w2"], ["w1", "0", "-w3"], ["-w2", "w3", "0"]],
    "dw": {
        "w1": "theta1 - w2^w3",
        "w2": "theta2 - w3^w1",
        "w3": "theta3 - w1^w2",
    },
    "alpha": {
        "alpha1": "dy1 + y2*w1 - y3*w2",
        "alpha2": "dy2 - y1*w1 + y3*w3",
        "alpha3": "dy3 + y1*w2 - y2*w3",
    },
    "dalpha": {
        "alpha1": "y2*theta1 - y3*theta2 - w1^alpha2 + w2^alpha3",
        "alpha2": "-y1*theta1 + y3*theta3 + w1^alpha1 - w3^alpha3",
        "alpha3": "y1*theta2 - y2*theta3 - w2^alpha1 + w3^alpha2",
    },
    "ratios": {
        1: {"y4": ("y2", "y1"), "y5": ("y3", "y1")},
        2: {"y6": ("y1", "y2"), "y7": ("y3", "y1")},
        3: {"y8": ("y1", "y3"), "y9": ("y2", "y3")},
    },
    "chart": {
        "alpha4": "dy4 - (1 + y4**2)*w1 + y4*y5*w2 + y5*w3",
        "alpha5": "dy5 - y4*y5*w1 + (1 + y5**2)*w2 - y4*w3",
        "alpha6": "dy6 + (1 + y6**2)*w1 - y7*w2 - y6*y7*w3",
        "alpha7": "dy7 + y6*y7*w1 + y6*w2 - (1 + y7**2)*w3",
        "alpha8": "dy8 + y9*w1 - (1 + y8**2)*w2 + y8*y9*w3",
        "alpha9": "dy9 - y8*w1 - y8*y9*w2 + (1 + y9**2)*w3",
    },
    "subconnection": {
        1: [["2*y4*w1 - y5*w2", "-y4*w2 - w3"], ["y5*w1 + w3", "y4*w1 - 2*y5*w2"]],
        2: [["-2*y6*w1 + y7*w3", "w2 + y6*w3"], ["-y7*w1 - w6", "-y6*w1 + 2*y7*w3"]],
        3: [["2*y8*w2 - y9*w3", "-w1 - y9*w3"], ["w1 + y9*w2", "y8*w2 - 2*y9*w3"]],
    },
    "chart_theta": {
        "alpha4": "-(1 + y4**2)*theta1 + y4*y5*theta2 + y5*theta3",
        "alpha5": "-y4*y5*theta1 + (1 + y5**2)*theta2 - y4*theta3",
        "alpha6": "(1 + y6**2)*theta1 - y7*theta2 - y6*y7*theta3",
        "alpha7": "y6*y7*theta1 + y6*theta2 - (1 + y7**2)*theta3",
        "alpha8": "y1*theta1 - (1 + y8**2)*theta2 + y8*y9*theta3",
        "alpha9": "-y8*theta1 - y8*y9*theta2 + (1 + y9**2)*theta3",
    },
    "subcurvature": {
        1: [
            ["2*y4*theta1 - y5*theta2 + 2*alpha4^w1 - alpha5^w2", "-y4*theta2 - theta3 - alpha4^w2"],
            ["y5*theta1 + theta3 + alpha5^w1", "y4*theta1 - 2*y5*theta2 + alpha4^w1 - 2*alpha5^w2"],
        ],
    },
    "trace_closure": {
        1: "y4*theta1 - y5*theta2 - w1^alpha4 + w2^alpha5",
        2: "-y6*theta1 + y7*theta3 + w1^alpha6 - w3^alpha7",
        3: "y8*theta2 - y9*theta3 - w2^alpha8 + w3^alpha9",
    },
}


_S = "1/3*sqrt3"

SU3 = {
    "connection": [
        [f"w3 + {_S}*w8", "W12m", "W45m"],
        ["W12p", f"-w3 + {_S}*w8", "W67m"],
        ["W45p", "W67p", f"-2/3*sqrt3*w8"],
    ],
    "dw": {
        "w1": "theta1 + 2*i*w2^w3 + i*w4^w7 - i*w5^w6",
        "w2": "theta2 - 2*i*w1^w3 + i*w4^w6 + i*w5^w7",
        "w3": "theta3 + 2*i*w1^w2 + i*w4^w5 - i*w6^w7",
        "w4": "theta4 - i*w1^w7 - i*w2^w6 - i*w3^w5 + sqrt3*i*w5^w8",
        "w5": "theta5 + i*w1^w6 - i*w2^w7 + i*w3^w4 - sqrt3*i*w4^w8",
        "w6": "theta6 - i*w1^w5 + i*w2^w4 + i*w3^w7 + sqrt3*i*w7^w8",
        "w7": "theta7 + i*w1^w4 + i*w2^w5 - i*w3^w6 - sqrt3*i*w6^w8",
        "w8": "theta8 + sqrt3*i*w4^w5 + sqrt3*i*w6^w7",
    },
    "alpha": {
        "alpha1": f"dy1 - (w3 + {_S}*w8)*y1 - W12m*y2 - W45m*y3",
        "alpha2": f"dy2 - W12p*y1 + (w3 - {_S}*w8)*y2 - W67m*y3",
        "alpha3": "dy3 - W45p*y1 - W67p*y2 + 2/3*sqrt3*w8*y3",
    },
    "dalpha": {
        "alpha1": f"-y2*T12m - y1*theta3 - y3*T45m - {_S}*y1*theta8"
                  f" + (w3 + {_S}*w8)^alpha1 + W12m^alpha2 + W45m^alpha3",
        "alpha2": f"-y1*T12p + y2*theta3 - {_S}*y2*theta8 - y3*T67m"
                  f" + W12p^alpha1 - (w3 - {_S}*w8)^alpha2 + W67m^alpha3",
        "alpha3": "-y1*T45p - y2*T67p + 2/3*sqrt3*y3*theta8"
                  " + W45p^alpha1 + W67p^alpha2 - 2/3*sqrt3*w8^alpha3",
    },
    "ratios": {
        1: {"y4": ("y2", "y1"), "y5": ("y3", "y1")},
        2: {"y6": ("y1", "y2"), "y7": ("y3", "y2")},
        3: {"y8": ("y1", "y3"), "y9": ("y2", "y3")},
    },
    "chart": {
        "alpha4": "dy4 - W12p + 2*y4*w3 + y4**2*W12m - y5*W67m + y4*y5*W45m",
        "alpha5": "dy5 - W45p + y5*(w3 + sqrt3*w8) + y5**2*W45m - y4*W67p + y4*y5*W12m",
        "alpha6": "dy6 - W12m - 2*y6*w3 + y6**2*W12p - y7*W45m + y6*y7*W67m",
        "alpha7": "dy7 - W67p - y7*(w3 - sqrt3*w8) + y7**2*W67m - y6*W45p + y6*y7*W12p",
        "alpha8": "dy8 - W45m - y8*(w3 + sqrt3*w8) + y8**2*W45p - y9*W12m + y8*y9*W67p",
        "alpha9": "dy9 - W67m + y9*(w3 - sqrt3*w8) + y9**2*W67p - y8*W12p + y8*y9*W45p",
    },
    "subconnection": {
        1: [["-2*w3 - 2*y4*W12m - y5*W45m", "W67m - y4*W45m"],
            ["W67p - y5*W12m", "-w3 - sqrt3*w8 - y4*W12m - 2*y5*W45m"]],
        2: [["2*w3 - 2*y6*W12p - y7*W67m", "W45m - y6*W67m"],
            ["W45p - y7*W12p", "w3 - sqrt3*w8 - y6*W12p - 2*y7*W67m"]],
        3: [["w3 + sqrt3*w8 - 2*y8*W45p - y9*W67p", "W12m - y8*W67p"],
            ["W12p - y9*W45p", "-w3 + sqrt3*w8 - y8*W45p - 2*y9*W67p"]],
    },
    "chart_theta": {
        "alpha4": "(y4**2 - 1)*theta1 - i*(y4**2 + 1)*theta2 + 2*y4*theta3 + y4*y5*T45m - y5*T67m",
        "alpha5": "y4*y5*T12m + y5*theta3 + (y5**2 - 1)*theta4 - i*(y5**2 + 1)*theta5"
                  " - y4*T67p + sqrt3*y5*theta8",
        "alpha6": "(y6**2 - 1)*theta1 + i*(y6**2 + 1)*theta2 - 2*y6*theta3 - y7*T45m + y6*y7*T67m",
        "alpha7": "y6*y7*T12p - y7*theta3 - y6*T45p + (y7**2 - 1)*theta6 - i*(y7**2 + 1)*theta7"
                  " + sqrt3*y7*theta8",
        "alpha8": "-y9*T12m - y8*theta3 + (y8**2 - 1)*theta4 + i*(y8**2 + 1)*theta5 + y8*y9*T67p"
                  " - sqrt3*y8*theta8",
        "alpha9": "-y8*T12p + y9*theta3 + y8*y9*T45p + (y9**2 - 1)*theta6 + i*(y9**2 + 1)*theta7"
                  " - sqrt3*y9*theta8",
    },
    "subcurvature": {
        1: [["2*W12p^alpha4 + W45m^alpha5 - 2*y4*T12m - 2*theta3 - y5*T45m",
             "W45m^alpha4 - y4*T45m + T67m"],
            ["W12m^alpha5 - y5*T12m + T67p",
             "W12m^alpha4 + 2*W45m^alpha5 - y4*T12m - theta3 - 2*T45m - sqrt3*theta8"]],
        2: [["2*W12p^alpha6 + W67m^alpha7 - 2*y6*T12p + theta3 - y7*T67m",
             "W67m^alpha6 + T45m - y6*T67m"],
            ["W12p^alpha7 - y7*T12p + T45p",
             "W12p^alpha6 + 2*W67m^alpha7 - y6*T12p + theta3 - 2*y7*T67m - sqrt3*theta8"]],
        3: [["2*W45p^alpha8 + W67p^alpha9 + theta3 - 2*y8*T45p - y9*T67p + sqrt3*theta8",
             "W67p^alpha8 + T12m - y8*T67p"],
            ["W45p^alpha9 + T12p - y9*T45p",
             "W45p^alpha8 + 2*W67p^alpha9 - theta3 - y8*T45p - 2*y9*T67p + sqrt3*theta8"]],
    },
    "trace_closure": {
        1: f"W12m^alpha4 + W45m^alpha5 - y4*T12m - theta3 - y5*T45m - {_S}*theta8",
        2: f"W12p^alpha6 + W67m^alpha7 - y6*T12p + theta3 - y7*T67m - {_S}*theta8",
        3: "W45p^alpha8 + W67p^alpha9 - y8*T45p - y9*T67p + 2/3*sqrt3*theta8",
    },
}

PRINTED = {"sl2r": SL2R, "o3": O3, "su3": SU3}
