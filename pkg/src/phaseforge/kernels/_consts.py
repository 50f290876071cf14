HIT_TOL = 1e-12  # m, tie window along the ray / in arc length
U_TOL = 1e-12  # segment-parameter slack so vertex hits are not lost
T_MIN = 1e-12  # m, smallest accepted forward ray parameter
PARALLEL_TOL = 1e-14
