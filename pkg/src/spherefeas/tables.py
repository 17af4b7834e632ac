"""Published benchmark means and growth-rate fits, kept as reference data.

``TABLE1[family]`` rows are ``(d, simplex, combinatorial, rescaled, rescalings)``
with ``n = 8d``; simplex counts exclude the ``d`` basis-building pivots.
``TABLE3[family]`` rows are the same columns with ``n`` instead of ``d``
at ``d = 100``.  ``TABLE2[family]`` maps a column label to ``(alpha, beta)``.
"""

TABLE1 = {
    "ex1": [
        (10, 13.4, 20.6, 16.8, 5.8),
        (20, 31.2, 57.8, 35.2, 12.0),
        (40, 93.4, 146.0, 69.2, 18.8),
        (80, 274.4, 353.2, 146.6, 23.2),
        (160, 769.2, 926.0, 294.8, 27.4),
        (320, 2114.6, 2156.6, 585.0, 29.8),
        (640, 6321.0, 4756.4, 1179.0, 33.8),
    ],
    "ex2": [
        (10, 17.0, 28.8, 25.8, 9.2),
        (20, 42.6, 62.6, 54.2, 14.0),
        (40, 122.0, 154.8, 108.8, 20.8),
        (80, 346.6, 385.2, 228.8, 29.6),
        (160, 925.0, 923.8, 528.2, 35.0),
        (320, 2528.0, 2296.8, 939.0, 41.2),
        (640, 7294.4, 5388.0, 1909.4, 45.4),
    ],
    "ex3": [
        (10, 15.8, 27.4, 24.0, 7.4),
        (20, 41.0, 58.4, 50.2, 11.0),
        (40, 112.4, 141.2, 101.2, 17.0),
        (80, 326.2, 368.6, 210.0, 19.8),
        (160, 887.0, 857.2, 422.0, 21.0),
        (320, 2565.2, 2183.2, 867.0, 22.6),
        (640, 7151.0, 5125.2, 1787.0, 23.4),
    ],
}

# simplex_init: fitted with the d starting pivots added back in
TABLE2 = {
    "ex1": {"simplex_init": (0.8735, 1.3783), "simplex": (0.3890, 1.4990),
            "combinatorial": (1.1122, 1.3093), "rescaled": (1.6269, 1.0214)},
    "ex2": {"simplex_init": (1.0709, 1.3432), "simplex": (0.5605, 1.4621),
            "combinatorial": (1.4575, 1.2719), "rescaled": (2.4228, 1.0334)},
    "ex3": {"simplex_init": (0.9950, 1.3793), "simplex": (0.5010, 1.4779),
            "combinatorial": (1.3538, 1.2747), "rescaled": (2.2439, 1.0334)},
}

TABLE3 = {
    "ex1": [
        (400, 222.0, 336.4, 158.2, 20.8),
        (800, 386.6, 481.0, 185.8, 24.4),
        (1600, 502.0, 597.2, 210.8, 27.6),
        (3200, 644.6, 670.2, 225.4, 28.6),
        (6400, 745.2, 781.4, 244.2, 30.2),
    ],
    "ex2": [
        (400, 302.4, 345.0, 247.2, 27.6),
        (800, 456.6, 536.0, 294.6, 32.2),
        (1600, 570.6, 602.8, 312.2, 32.8),
        (3200, 735.0, 713.4, 330.0, 34.6),
        (6400, 869.6, 794.2, 360.0, 38.0),
    ],
    "ex3": [
        (400, 297.4, 334.0, 224.6, 17.8),
        (800, 449.8, 491.8, 261.0, 19.8),
        (1600, 553.8, 545.6, 279.2, 21.0),
        (3200, 732.6, 657.8, 293.6, 20.6),
        (6400, 838.6, 699.4, 304.2, 20.8),
    ],
}

COLUMNS = ("simplex", "combinatorial", "rescaled", "rescalings")


def table1_points(family: str, column: str, with_init: bool = False):
    """``(d, mean steps)`` pairs of one published step-count column."""
    j = COLUMNS.index(column) + 1
    return [(row[0], row[j] + (row[0] if with_init else 0.0)) for row in TABLE1[family]]
