"""Independent direct-summation SINR for small networks.

Plain Python over lists with the math module only, written from the
definitions and sharing no code with the package.

network description (all linear units, mW):
  cells:    list of dicts {"power": mW, "channel": hashable}
  gain:     gain[k][x] large-scale linear gain user k <-> cell x
  serving:  serving[k] cell index
  ul_power: ul_power[k] mW
  cosched:  cosched[x] = user transmitting in cell x on the PRB of interest (or None)
  noise_dl, noise_ul: noise power per user (mW)
"""

import math


def dl_sinr(k, net):
    x = net["serving"][k]
    cells = net["cells"]
    s = cells[x]["power"] * net["gain"][k][x]
    i = 0.0
    for y, c in enumerate(cells):
        if y != x and c["channel"] == cells[x]["channel"]:
            i += c["power"] * net["gain"][k][y]
    return s / (i + net["noise_dl"][k])


def ul_sinr(k, net):
    x = net["serving"][k]
    cells = net["cells"]
    s = net["ul_power"][k] * net["gain"][k][x]
    i = 0.0
    for y, c in enumerate(cells):
        if y == x or c["channel"] != cells[x]["channel"]:
            continue
        l = net["cosched"][y]
        if l is not None:
            i += net["ul_power"][l] * net["gain"][l][x]
    return s / (i + net["noise_ul"][k])


def db(x):
    return 10.0 * math.log10(x)
