"""Regenerates crates/core/src/default_profile.json.

Usage: python3 scripts/gen_default_profile.py > crates/core/src/default_profile.json

Cluster delays follow an exponential distribution with 100 ns mean, powers
decay exponentially with delay under 3 dB log-normal shadowing. BS-side
cluster centres sit around a sector direction (20 deg azimuth, 5 deg
elevation spread); UE-side centres are spread widely.
"""
import json, math, random, sys
def gen(seed, az_sd_deg, el_sd_deg, el_mean_deg=30.0, name=None):
    rng = random.Random(seed)
    ds = 100e-9
    n = 8
    taus = sorted(-ds*math.log(1-rng.random()) for _ in range(n))
    taus = [t - taus[0] for t in taus]
    pw = [math.exp(-t/ds) * 10**(-rng.gauss(0,3)/10) for t in taus]
    s = sum(pw); pw = [p/s for p in pw]
    az0 = rng.uniform(-math.pi/3, math.pi/3)
    cl = []
    for t, p in zip(taus, pw):
        cl.append(dict(delay_s=float(f"{t:.4g}"), power=round(p,6),
            azimuth_arrival=round(az0 + math.radians(rng.gauss(0, az_sd_deg)),4),
            elevation_arrival=round(math.radians(max(1.0, rng.gauss(el_mean_deg, el_sd_deg))),4),
            azimuth_departure=round(rng.uniform(0, 2*math.pi),4),
            elevation_departure=round(math.radians(rng.uniform(10,60)),4),
            angle_spread=0.087266, rays=20))
    return dict(version=1, name=name or "clustered-8x20-ds100ns", sampling_rate_hz=30.72e6, kernel_half_width=8,
        bs_array=dict(rows=8,cols=8,spacing=0.5), ue_array=dict(rows=2,cols=2,spacing=0.5), clusters=cl)
if __name__ == "__main__":
    json.dump(gen(20240601, 20.0, 5.0), sys.stdout, indent=2)
    sys.stdout.write("\n")
