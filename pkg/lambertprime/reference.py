"""
Published values used as golden data and by the ``table`` command.

pi(10^k) and p(10^k) are the public prime-counting records. The F and G
tables are the published corrected-estimator columns; value-table row i
sits at n = i * 10^14.
"""
from typing import NamedTuple

PI_POWERS_OF_TEN = {
    1: 4,
    2: 25,
    3: 168,
    4: 1229,
    5: 9592,
    6: 78498,
    7: 664579,
    8: 5761455,
    9: 50847534,
    10: 455052511,
    11: 4118054813,
    12: 37607912018,
    13: 346065536839,
    14: 3204941750802,
    15: 29844570422669,
    16: 279238341033925,
    17: 2623557157654233,
    18: 24739954287740860,
    19: 234057667276344607,
    20: 2220819602560918840,
    21: 21127269486018731928,
    22: 201467286689315906290,
    23: 1925320391606803968923,
    24: 18435599767349200867866,
}

P_POWERS_OF_TEN = {
    1: 29,
    2: 541,
    3: 7919,
    4: 104729,
    5: 1299709,
    6: 15485863,
    7: 179424673,
    8: 2038074743,
    9: 22801763489,
    10: 252097800623,
    11: 2760727302517,
    12: 29996224275833,
    13: 323780508946331,
    14: 3475385758524527,
    15: 37124508045065437,
    16: 394906913903735329,
    17: 4185296581467695669,
    18: 44211790234832169331,
    19: 465675465116607065549,
    20: 4892055594575155744537,
    21: 51271091498016403471853,
    22: 536193870744162118627429,
    23: 5596564467986980643073683,
    24: 58310039994836584070534263,
}


class FTableRow(NamedTuple):
    exponent: int
    f_value: str
    p_n: int


F_TABLE = (
    FTableRow(16, '394906913903735328.99999995710593', 394906913903735329),
    FTableRow(17, '4185296581467695668.9998280338750', 4185296581467695669),
    FTableRow(18, '44211790234832169331.000076399063', 44211790234832169331),
    FTableRow(19, '465675465116607065549.00000499731', 465675465116607065549),
    FTableRow(20, '4892055594575155744537.0000098572', 4892055594575155744537),
    FTableRow(21, '51271091498016403471852.999978699', 51271091498016403471853),
    FTableRow(22, '536193870744162118627429.00001989', 536193870744162118627429),
    FTableRow(23, '5596564467986980643073682.9999696', 5596564467986980643073683),
    FTableRow(24, '58310039994836584070534263.000118', 58310039994836584070534263),
)


class ValueTableRow(NamedTuple):
    row: int
    pi_n: int
    p_n: int
    g_value: int

    @property
    def n(self) -> int:
        return self.row * 10**14


VALUE_TABLE_ROWS = (
    ValueTableRow(1, 3204941750802, 3475385758524527, 3475385752465280),
    ValueTableRow(2, 6270424651315, 7093600525704677, 7093600531547406),
    ValueTableRow(3, 9287441600280, 10765662794071351, 10765662776140778),
    ValueTableRow(4, 12273824155491, 14472680634646931, 14472680642211900),
    ValueTableRow(5, 15237833654620, 18205684894350047, 18205684890027179),
    ValueTableRow(6, 18184255291570, 21959393830706447, 21959393831829265),
    ValueTableRow(7, 21116208911023, 25730318403586483, 25730318401089988),
    ValueTableRow(8, 24035890368161, 29515978892552597, 29515978901069447),
    ValueTableRow(9, 26944926466221, 33314521777674083, 33314521779133363),
    ValueTableRow(10, 29844570422669, 37124508045065437, 37124507999149021),
    ValueTableRow(11, 32735816605908, 40944788655376237, 40944788664190013),
    ValueTableRow(12, 35619471693548, 44774424266565143, 44774424274288359),
    ValueTableRow(13, 38496205973965, 48612632846248317, 48612632846598877),
    ValueTableRow(14, 41366582391891, 52458753029241283, 52458753010788072),
    ValueTableRow(15, 44231080178273, 56312218341118283, 56312218348943058),
    ValueTableRow(16, 47090114439072, 60172538090123567, 60172538133649809),
    ValueTableRow(17, 49944045778207, 64039282905020807, 64039282881733481),
    ValueTableRow(18, 52793190012734, 67912074089826233, 67912074089530037),
)
