"""Embedded reference data: Golomb bounds, known existence sets, nonexistence facts.

Interval strings use "a-b" for inclusive ranges, comma separated.
"""
from __future__ import annotations


def parse_intervals(s: str) -> list[int]:
    out: list[int] = []
    for part in s.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return sorted(set(out))


def format_intervals(vals) -> str:
    vals = sorted(set(vals))
    parts = []
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and vals[j + 1] == vals[j] + 1:
            j += 1
        parts.append(str(vals[i]) if i == j else f"{vals[i]}-{vals[j]}")
        i = j + 1
    return ",".join(parts)


# G(k) = 2 L(k) + 1 from the shortest known Golomb ruler of order k.
# k=2..15: small-k existence table; 16..41 medium table; 42..83 bound table.
GOLOMB_BOUND = {
    2: 3, 3: 7, 4: 13, 5: 23, 6: 35, 7: 51, 8: 69, 9: 89, 10: 111, 11: 145,
    12: 171, 13: 213, 14: 255, 15: 303,
    16: 355, 17: 399, 18: 433, 19: 493, 20: 567, 21: 667, 22: 713, 23: 745,
    24: 851, 25: 961, 26: 985, 27: 1107, 28: 1171, 29: 1247, 30: 1361,
    31: 1495, 32: 1569, 33: 1719, 34: 1877, 35: 1975, 36: 2011, 37: 2199,
    38: 2293, 39: 2505, 40: 2565, 41: 2611,
    42: 2795, 43: 3015, 44: 3193, 45: 3375, 46: 3407, 47: 3609, 48: 3775,
    49: 3917, 50: 4189, 51: 4381, 52: 4541, 53: 4695, 54: 4747, 55: 5197,
    56: 5451, 57: 5547, 58: 5703, 59: 5823, 60: 6039, 61: 6269, 62: 6431,
    63: 6783, 64: 7055, 65: 7187, 66: 7515, 67: 7639, 68: 7913, 69: 8291,
    70: 8435, 71: 8661, 72: 8947, 73: 9027, 74: 9507, 75: 9965, 76: 10179,
    77: 10409, 78: 10599, 79: 10817, 80: 11127, 81: 11435, 82: 11629,
    83: 12041,
}

# Cyclic existence for k <= 15 in [P(k), G(k)).
# (k, v_delta, achieved cyclic, values new in the reference search, E_c bound, sharp)
SMALL_K = {
    2: (3, "", "", 3, True),
    3: (7, "", "", 7, True),
    4: (13, "", "", 13, True),
    5: (21, "21", "", 23, True),
    6: (31, "31", "", 35, True),
    7: (48, "48-50", "49,50", 48, True),
    8: (57, "57,63-68", "64,67,68", 63, True),
    9: (73, "73,80,85-88", "86,87", 85, True),
    10: (91, "91,107-110", "109", 107, False),
    11: (120, "120,133,135-144", "137,139,142-144", 135, False),
    12: (133, "133,156,158,159,161-170", "158,162-165,167,169,170", 161, False),
    13: (168, "168,183,193-212", "197,201,203-212", 193, False),
    14: (183, "183,225-254", "226,227,231,233-254", 225, False),
    15: (255, "255,267-302", "278,282,284,286,287,290-302", 267, False),
}

# Cyclic existence for 16 <= k <= 41: (known-family values, values from the
# multiplier/delta search) for the rows we reproduce, plus the E_c bound for all.
MEDIUM_K_SETS = {
    16: ("255,272,273,288,307", "318,320-329,331-354"),
    17: ("273,288,307,342,360,381", "343,353,357-363,365-398"),
    18: ("307,342,360,381", "401,403,405-407,410,412-418,420-432"),
    19: ("360,381", "455,457,464,467,468,470-477,479,481-492"),
    20: ("381,506,528,553",
         "503,508,513,516,519,520,525,527-530,532,534-566"),
}

EC_BOUND = {
    16: 331, 17: 365, 18: 420, 19: 481, 20: 534, 21: 614, 22: 649, 23: 713,
    24: 775, 25: 865, 26: 943, 27: 1021, 28: 1085, 29: 1187, 30: 1274,
    31: 1351, 32: 1459, 33: 1593, 34: 1787, 35: 1859, 36: 1961, 37: 2085,
    38: 2180, 39: 2403, 40: 2524, 41: 2577,
    42: 2632, 43: 2860, 44: 2917, 45: 3280, 46: 3353, 47: 3453, 48: 3765,
    49: 3839, 50: 3871, 51: 4308, 52: 4359, 53: 4463, 54: 4513, 55: 5195,
    56: 5341, 57: 5501, 58: 5551, 59: 5612, 60: 5687, 61: 5994, 62: 6150,
    63: 6611, 64: 6796, 65: 6853, 66: 7279, 67: 7359, 68: 7463, 69: 8111,
    70: 8125, 71: 8288, 72: 8694, 73: 8813, 74: 8965, 75: 9883, 76: 10023,
    77: 10229, 78: 10395, 79: 10800, 80: 10977, 81: 11396, 82: 11443,
    83: 11593,
}
for _k, _row in SMALL_K.items():
    EC_BOUND[_k] = _row[3]

# Any (not necessarily cyclic) configurations known in [P(k), G(k)),
# with the E(k) upper bound.
ANY_K = {
    3: ("", 7), 4: ("13", 13), 5: ("21", 23), 6: ("31,34", 35),
    7: ("45,48-50", 48), 8: ("57,63-68", 63), 9: ("73,78,80-88", 80),
    10: ("91,98,107-110", 107), 11: ("120-133,135-144", 135),
    12: ("133,135,156-170", 156), 13: ("168-183,189,193-212", 193),
    14: ("183,210,224-254", 224), 15: ("231,240-302", 240),
    16: ("252,255-354", 255),
}

# Nonexistence facts and sporadic existence, with a short citation tag.
NO_CONFIG = [
    (22, 5, "deficiency-one theorem"), (32, 6, "Gropp"), (33, 6, "Kaski-Ostergard"),
    (43, 7, "Bruck-Ryser"), (44, 7, "deficiency-one theorem"),
    (58, 8, "deficiency-one theorem"), (74, 9, "deficiency-one theorem"),
    (92, 10, "deficiency-one theorem"), (111, 11, "Lam-Thiel-Swiercz"),
    (112, 11, "literature"), (134, 12, "deficiency-one theorem"),
    (158, 13, "deficiency-one theorem"), (184, 14, "deficiency-one theorem"),
    (211, 15, "Bruck-Ryser"), (212, 15, "deficiency-one theorem"),
    (274, 17, "deficiency-one theorem"), (344, 19, "deficiency-one theorem"),
    (382, 20, "deficiency-one theorem"), (422, 21, "deficiency-one theorem"),
    (463, 22, "Bruck-Ryser"), (464, 22, "deficiency-one theorem"),
    (507, 23, "Bruck-Ryser"), (508, 23, "deficiency-one theorem"),
    (554, 24, "deficiency-one theorem"), (652, 26, "deficiency-one theorem"),
    (758, 28, "deficiency-one theorem"), (814, 29, "deficiency-one theorem"),
    (872, 30, "deficiency-one theorem"), (931, 31, "Bruck-Ryser"),
    (932, 31, "deficiency-one theorem"), (994, 32, "deficiency-one theorem"),
    (1058, 33, "deficiency-one theorem"), (1123, 34, "Bruck-Ryser"),
    (1124, 34, "deficiency-one theorem"), (1192, 35, "deficiency-one theorem"),
    (1334, 37, "deficiency-one theorem"), (1483, 39, "Bruck-Ryser"),
    (1484, 39, "deficiency-one theorem"), (1562, 40, "deficiency-one theorem"),
    (1642, 41, "deficiency-one theorem"),
]

NO_CYCLIC = (
    [(34, 6, "Lipman")]
    + [(v, 8, "Lipman") for v in range(59, 63)]
    + [(v, 9, "Funk") for v in list(range(75, 80)) + list(range(81, 85))]
    + [(v, 16, "modular ruler tables") for v in range(241, 255)]
)

SPORADIC = [(45, 7, "literature"), (82, 9, "literature"),
            (135, 12, "literature"), (34, 6, "literature")]
