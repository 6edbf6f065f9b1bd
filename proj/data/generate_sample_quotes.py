"""Writes a synthetic options chain in the quotes interchange schema.

Prices and greeks come from Black-Scholes with a mild volatility smile, so
columns are related the way real chains are. Deterministic for a given seed.
"""
import argparse
import csv
import datetime as dt
import math
import random

HEADER = ["contract", "underlying", "expiration", "type", "strike", "style", "bid", "bid_size", "ask",
          "ask_size", "volume", "open_interest", "quote_date", "delta", "gamma", "theta", "vega",
          "implied_volatility"]


def ncdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def npdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def black_scholes(kind, s, k, t, r, vol):
    d1 = (math.log(s / k) + (r + 0.5 * vol * vol) * t) / (vol * math.sqrt(t))
    d2 = d1 - vol * math.sqrt(t)
    df = math.exp(-r * t)
    if kind == "call":
        price = s * ncdf(d1) - k * df * ncdf(d2)
        delta = ncdf(d1)
        theta = -s * npdf(d1) * vol / (2 * math.sqrt(t)) - r * k * df * ncdf(d2)
    else:
        price = k * df * ncdf(-d2) - s * ncdf(-d1)
        delta = ncdf(d1) - 1.0
        theta = -s * npdf(d1) * vol / (2 * math.sqrt(t)) + r * k * df * ncdf(-d2)
    gamma = npdf(d1) / (s * vol * math.sqrt(t))
    vega = s * npdf(d1) * math.sqrt(t) / 100.0
    return price, delta, gamma, theta / 365.0, vega


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--output", default="sample_quotes.csv")
    args = parser.parse_args()
    rng = random.Random(args.seed)

    quote_date = dt.date(2024, 3, 1)
    spot, rate = 100.0, 0.04
    rows = []
    for days in (14, 30, 60, 91, 182, 365):
        expiry = quote_date + dt.timedelta(days=days)
        t = days / 365.0
        for strike in range(70, 131, 5):
            moneyness = math.log(strike / spot)
            iv = 0.22 - 0.10 * moneyness + 0.35 * moneyness * moneyness + 0.02 / math.sqrt(t)
            for kind in ("call", "put"):
                price, delta, gamma, theta, vega = black_scholes(kind, spot, strike, t, rate, iv)
                half_spread = max(0.01, 0.01 + 0.015 * price) / 2.0
                bid = max(0.0, round(price - half_spread, 2))
                ask = round(price + half_spread, 2)
                if ask <= bid:
                    ask = round(bid + 0.01, 2)
                liquidity = math.exp(-8.0 * moneyness * moneyness)
                volume = int(rng.expovariate(1.0) * 400 * liquidity)
                rows.append([
                    f"XYZ{expiry:%y%m%d}{kind[0].upper()}{strike * 1000:08d}", "XYZ", expiry.isoformat(), kind,
                    strike, "A", f"{bid:.2f}", rng.randint(1, 60), f"{ask:.2f}", rng.randint(1, 60), volume,
                    int(volume * rng.uniform(2.0, 12.0)), quote_date.isoformat(), f"{delta:.5f}", f"{gamma:.6f}",
                    f"{theta:.5f}", f"{vega:.5f}", f"{iv:.5f}",
                ])
    rng.shuffle(rows)
    with open(args.output, "w", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(rows)


if __name__ == "__main__":
    main()
