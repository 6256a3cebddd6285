"""Known identifications of small lemniscate knots and links.

These are lookup data only; nothing here is computed.  Jones coefficients are
absolute values, lowest power first.
"""

from __future__ import annotations

# L(2n+1, 2, 2), n = 1..6.  Jones coefficients cover t^(-n-1) .. t^0.
FIG8_FAMILY = {
    3: {"name": "4_1", "tangle": [2, 2], "jones": [1, 1, 1]},
    5: {"name": "6_3", "tangle": [2, 1, 1, 2], "jones": [1, 2, 2, 3]},
    7: {"name": "8_9", "tangle": [3, 1, 1, 3], "jones": [1, 2, 3, 4, 5]},
    9: {"name": "10_17", "tangle": [4, 1, 1, 4], "jones": [1, 2, 3, 5, 6, 7]},
    11: {"name": "K12a_1273", "tangle": [5, 1, 1, 5], "jones": [1, 2, 3, 5, 7, 8, 9]},
    13: {"name": "K14a_19298", "tangle": [6, 1, 1, 6], "jones": [1, 2, 3, 5, 7, 9, 10, 11]},
}

# L(s, 2, 3) with b > 0.
THREE_LOBE_FAMILY = {
    4: {"name": "L6a1", "components": 2, "jones": [1, 2, 2, 2, 3, 1, 1]},
    5: {"name": "7_7", "components": 1, "jones": [1, 2, 3, 4, 4, 3, 3, 1]},
    7: {"name": "9_31", "components": 1, "jones": [1, 4, 6, 8, 10, 9, 8, 5, 3, 1]},
    8: {"name": "L10a91", "components": 2, "jones": [1, 4, 7, 10, 13, 13, 9, 3, 1]},
    10: {
        "name": None,  # 12-crossing link beyond available tables
        "components": 2,
        "jones": [1, 4, 9, 15, 22, 28, 30, 29, 25, 18, 12, 6, 3, 1],
    },
    11: {
        "name": "13a_4296",
        "components": 1,
        "jones": [1, 4, 9, 17, 26, 36, 43, 45, 44, 37, 29, 20, 12, 6, 3, 1],
    },
}

# Known minimal words for L(s, 2, 3), s <= 7, as signed generator lists.
THREE_LOBE_MINIMAL_WORDS = {
    4: [1, -2, 1, 3, -2, 3],
    5: [1, -2, 1, -2, 3, -2, 3],
    7: [1, 1, -2, 1, -2, 3, -2, 3, 3],
}

# Other named closures: (s, r, l) -> name.
OTHER = {
    (3, 3, 2): "L6a4",  # Borromean rings
    (3, 4, 2): "8_18",
    (3, 5, 2): "10_123",
    (5, 3, 2): "K12n_706",
    (4, 3, 3): "9_40",
}


def knot_name(s: int, r: int, l: int) -> str | None:
    if r == 1:
        return "unknot"
    if l == 1:
        return f"T({s},{r})"
    if r == 2 and l == 2 and s in FIG8_FAMILY:
        return FIG8_FAMILY[s]["name"]
    if r == 2 and l == 3 and s in THREE_LOBE_FAMILY:
        return THREE_LOBE_FAMILY[s]["name"]
    return OTHER.get((s, r, l))
