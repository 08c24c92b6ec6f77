"""Smoke tests for the tripweave python module: a miniature end-to-end pass
over every exposed operation family."""

import os
import sys
import tempfile

import numpy as np

import tripweave as tw

CONFIG_DIR = os.environ.get("TW_CONFIG_DIR", "configs")

failures = []


def check(name, condition):
    status = "ok" if condition else "FAIL"
    print(f"[{status}] {name}")
    if not condition:
        failures.append(name)


def main():
    # geometry
    check("haversine identity", tw.haversine_miles((41.88, -87.63), (41.88, -87.63)) == 0.0)
    check(
        "haversine one degree of latitude",
        abs(tw.haversine_miles((0.0, 0.0), (1.0, 0.0)) - 69.094) < 0.01,
    )

    # region map
    region_map = tw.load_region_map(os.path.join(CONFIG_DIR, "chicago_regions.csv"))
    check("region order has 9 regions", len(region_map.region_order) == 9)
    check("area 32 is Central", region_map.name_of(32) == "Central")
    check("area 76 is Airport", region_map.name_of(76) == "Airport")
    check("absent area is Unknown", region_map.name_of(None) == "Unknown")

    # trip construction + csv round trip
    trips = [
        tw.TripRecord(
            "A", "2019-08-05 10:00:00", "2019-08-05 10:30:00", 1800,
            miles=2.0, pickup_area=8, dropoff_area=32,
            pickup_centroid=(41.90, -87.65), dropoff_centroid=(41.91, -87.64),
            fare=8.0, tip=1.0,
        ),
        tw.TripRecord(
            "B", "2019-08-05 10:35:00", "2019-08-05 11:00:00", 1500,
            miles=2.0, pickup_area=32, dropoff_area=8,
            pickup_centroid=(41.91, -87.64), dropoff_centroid=(41.92, -87.63),
            fare=7.0,
        ),
    ]
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "trips.csv")
        tw.write_trips_csv(path, trips)
        parsed, stats = tw.parse_trips_csv(path)
        check("csv round trip accepts everything", stats.rows_accepted == 2)
        check("csv round trip keeps money exact", parsed[0].trip_total_usd == 9.0)
        check("csv round trip keeps ids", [t.trip_id for t in parsed] == ["A", "B"])

    # candidate query
    cands = tw.query_candidates(trips, dropoff=(41.91, -87.64), end_ts="2019-08-05 10:30:00")
    check("candidate query finds the forced successor", cands == [1])

    # simulation: the forced chain assembles for any seed
    out = None
    for seed in (1, 99):
        out = tw.simulate(trips, tw.SimParams(seed=seed))
        check(f"forced chain one route (seed {seed})", len(out.routes) == 1)
        check(f"forced chain order (seed {seed})", out.routes[0].trips == [0, 1])
    report = tw.validate_routes(out, trips, tw.SimParams(seed=1))
    check("validator confirms the routes", report["ok"])

    # metrics
    m = tw.route_metrics(out.routes[0], trips)
    check("route metrics income", abs(m.income_usd - 16.0) < 1e-9)
    check(
        "metric identity",
        abs(m.est_e_per_hr * (m.driving_hours + 0.25 * m.n_trips) - m.income_usd) < 1e-9,
    )

    # synthetic oracle: isolated pool recovers exactly with greedy picks
    synth_trips, truth = tw.synth_generate(
        tw.SynthParams(n_drivers=25, trips_min=1, trips_max=8, isolation_mode=True, seed=11)
    )
    predicted = tw.simulate(synth_trips, tw.SimParams(seed=3, top_k=1))
    score = tw.score_routes(truth, [r.trips for r in predicted.routes])
    check("isolation recovery is exact", score.exact_partition)
    check("exact recovery f1", score.pair_f1 == 1.0)

    # features -> standardize on the recovered routes
    active = tw.filter_active(predicted.routes, min_trips=2)
    values, names, route_ids, rejected = tw.feature_matrix(active, synth_trips, region_map)
    check("feature matrix shape", values.shape == (len(route_ids), len(names)))
    check("no routes rejected for unknown regions", rejected == 0)
    standardized, mean, sd, flags = tw.standardize(values)
    check("standardized mean is zero", bool(np.all(np.abs(standardized.mean(axis=0)) < 1e-9)))

    # clustering on planted blobs
    rng = np.random.default_rng(7)
    blob = np.vstack(
        [rng.normal(loc, 0.1, size=(300, 2)) for loc in ((0.0, 0.0), (10.0, 0.0), (0.0, 10.0))]
    )
    model, rep = tw.select_k(blob, k_min=2, k_max=6, seed=5)
    check("select_k picks the planted k", rep["best_k"] == 3)
    check("silhouette is high on planted blobs", rep["scores"][3] > 0.9)
    check(
        "kmeans deterministic per seed",
        float(tw.kmeans(blob, 3, seed=5).inertia) == float(tw.kmeans(blob, 3, seed=5).inertia),
    )

    # analytics
    monthly = tw.monthly_cost_per_hour(trips)
    check("monthly rows", len(monthly) == 1)
    check(
        "monthly ratio of sums",
        abs(monthly[0]["cost_per_driving_hour"] - 16.0 / (3300 / 3600)) < 1e-9,
    )
    shares = tw.regional_distribution(trips, region_map, 2019)
    total = sum(row["share_pct"] for row in shares["pickup"])
    check("regional pickup shares sum to 100", abs(total - 100.0) < 1e-6)

    clusters = tw.cluster_report(predicted.routes, synth_trips, [0] * len(predicted.routes), 1)
    check("cluster report covers all routes", clusters[0]["members"] == len(predicted.routes))

    temporal = tw.temporal_proportions(predicted.routes, synth_trips, [0] * len(predicted.routes), 1)
    check("temporal proportions sum to 1", abs(sum(temporal[0]["shares"]) - 1.0) < 1e-9)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
