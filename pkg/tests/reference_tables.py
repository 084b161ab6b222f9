"""Reference error columns and orders for the four benchmark tables.

Each entry maps an ``(alpha, beta)`` pair to rows ``(step_denominator, e_inf, order)``;
``order`` is ``None`` on the first rung. Temporal tables vary ``tau = 1/d``
at fixed ``h``; spatial tables vary ``h = 1/d`` at fixed ``tau``.
"""

TABLE1 = {  # sixth order, h = 1/1000
    (0.25, 0.15): [(4, 9.1447e-10, None), (8, 2.3336e-10, 1.9704), (16, 5.9079e-11, 1.9818), (32, 1.4886e-11, 1.9887)],
    (0.25, 0.35): [(4, 1.3779e-09, None), (8, 3.4896e-10, 1.9813), (16, 8.7830e-11, 1.9903), (32, 2.2034e-11, 1.9950)],
    (0.25, 0.55): [(4, 1.8262e-09, None), (8, 4.6262e-10, 1.9809), (16, 1.1644e-10, 1.9902), (32, 2.9210e-11, 1.9951)],
}

TABLE2 = {  # sixth order, tau = 1/200
    (0.4, 0.1): [(12, 1.8047e-10, None), (14, 7.5031e-11, 5.6935), (16, 3.4678e-11, 5.7799), (18, 1.7276e-11, 5.9159)],
    (0.4, 0.3): [(12, 1.8011e-10, None), (14, 7.4697e-11, 5.7095), (16, 3.4353e-11, 5.8170), (18, 1.6955e-11, 5.9951)],
    (0.4, 0.5): [(12, 1.7987e-10, None), (14, 7.4486e-11, 5.7192), (16, 3.4153e-11, 5.8395), (18, 1.6760e-11, 6.0438)],
}

TABLE3 = {  # eighth order, h = 1/500
    (0.45, 0.15): [(4, 1.3338e-09, None), (8, 3.3783e-10, 1.9812), (16, 8.5051e-11, 1.9899), (32, 2.1342e-11, 1.9946)],
    (0.45, 0.35): [(4, 1.8801e-09, None), (8, 4.7658e-10, 1.9800), (16, 1.2000e-10, 1.9897), (32, 3.0108e-11, 1.9948)],
    (0.45, 0.55): [(4, 2.4266e-09, None), (8, 6.1660e-10, 1.9765), (16, 1.5543e-10, 1.9881), (32, 3.9020e-11, 1.9940)],
}

TABLE4 = {  # eighth order, tau = 1/160
    (0.2, 0.1): [(14, 3.1090e-11, None), (16, 1.1703e-11, 7.3169), (18, 4.6941e-12, 7.7561), (20, 2.0284e-12, 7.9637)],
    (0.2, 0.3): [(14, 3.0823e-11, None), (16, 1.1437e-11, 7.4245), (18, 4.6804e-12, 7.5857), (20, 2.1812e-12, 7.2466)],
    (0.2, 0.5): [(14, 3.0548e-11, None), (16, 1.1164e-11, 7.5383), (18, 4.8168e-12, 7.1367), (20, 2.3377e-12, 6.8616)],
}

TEMPORAL = {"table1": TABLE1, "table3": TABLE3}
SPATIAL = {"table2": TABLE2, "table4": TABLE4}
