"""Lilliefors critical values for the normal family.

Monte-Carlo table: 100000 replications per sample size,
seed 20250809, statistic standardized with ddof=1.
Regenerate with fbmreg.lilliefors.simulate_critical_values.
"""

import numpy as np

SIZES = np.array([4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 25, 30, 40, 50, 75, 100, 150, 200, 300, 500, 750, 1000, 2000])

ALPHAS = np.array([0.2, 0.15, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001])

CRITICAL = np.array([
    [0.302947, 0.321635, 0.345067, 0.375068, 0.395363, 0.413471, 0.421918, 0.433129],
    [0.288812, 0.301876, 0.318277, 0.342443, 0.366673, 0.395097, 0.411657, 0.436247],
    [0.268583, 0.281123, 0.297326, 0.323631, 0.346225, 0.371997, 0.388934, 0.423300],
    [0.252614, 0.264627, 0.280693, 0.304686, 0.325988, 0.352284, 0.368039, 0.401780],
    [0.239265, 0.250701, 0.265702, 0.288116, 0.308661, 0.333370, 0.349387, 0.383657],
    [0.227095, 0.237906, 0.252012, 0.273860, 0.293485, 0.316183, 0.331423, 0.365750],
    [0.216971, 0.227099, 0.240708, 0.262208, 0.281004, 0.303738, 0.319293, 0.349916],
    [0.207885, 0.218113, 0.231449, 0.251494, 0.269984, 0.291988, 0.307363, 0.339030],
    [0.200593, 0.210229, 0.222751, 0.242168, 0.260308, 0.281042, 0.296573, 0.324688],
    [0.193025, 0.202261, 0.214231, 0.232838, 0.250173, 0.270297, 0.284260, 0.314944],
    [0.186770, 0.195916, 0.207670, 0.225752, 0.242254, 0.261732, 0.275995, 0.304937],
    [0.181043, 0.189702, 0.201239, 0.218798, 0.234929, 0.254489, 0.266696, 0.292906],
    [0.176058, 0.184434, 0.195455, 0.212366, 0.227971, 0.246959, 0.258769, 0.286241],
    [0.170739, 0.178934, 0.189916, 0.206306, 0.221378, 0.239289, 0.252726, 0.280747],
    [0.166194, 0.174281, 0.184593, 0.200724, 0.215623, 0.234048, 0.246738, 0.273307],
    [0.162398, 0.170212, 0.180553, 0.196347, 0.210864, 0.228747, 0.239868, 0.267168],
    [0.158688, 0.166395, 0.176324, 0.191847, 0.205650, 0.223654, 0.234319, 0.259000],
    [0.143159, 0.149976, 0.158828, 0.172710, 0.185670, 0.201623, 0.212301, 0.235704],
    [0.131125, 0.137474, 0.145603, 0.158383, 0.170294, 0.184229, 0.193977, 0.215552],
    [0.114508, 0.120127, 0.127204, 0.138528, 0.148988, 0.161280, 0.169952, 0.188949],
    [0.102847, 0.107780, 0.114303, 0.124676, 0.133827, 0.145246, 0.152888, 0.168458],
    [0.084512, 0.088525, 0.093865, 0.101986, 0.109914, 0.119122, 0.125809, 0.139899],
    [0.073656, 0.077150, 0.081725, 0.088884, 0.095540, 0.103653, 0.109309, 0.120336],
    [0.060237, 0.063101, 0.066893, 0.072863, 0.078317, 0.085131, 0.089941, 0.099858],
    [0.052414, 0.054882, 0.058172, 0.063468, 0.068027, 0.073902, 0.078190, 0.086158],
    [0.042923, 0.044962, 0.047638, 0.051832, 0.055628, 0.060485, 0.063940, 0.071166],
    [0.033374, 0.034959, 0.037046, 0.040302, 0.043405, 0.047061, 0.049669, 0.055368],
    [0.027261, 0.028549, 0.030231, 0.032928, 0.035439, 0.038434, 0.040497, 0.045223],
    [0.023699, 0.024805, 0.026294, 0.028619, 0.030755, 0.033312, 0.035193, 0.038870],
    [0.016811, 0.017610, 0.018628, 0.020282, 0.021794, 0.023702, 0.024996, 0.027906],
])
