"""Tests for the synthetic society generator."""

import json
from collections import Counter

import numpy as np
import pandas as pd
import pytest

from borderflux.exceptions import ValidationError
from borderflux.geo import (
    AntennaRegistry,
    assign_population,
    build_voronoi,
    load_antennas,
    load_events,
    load_partition,
    make_site,
)
from borderflux.synth import (
    ACCEPTANCE_CAPITAL_RHO,
    acceptance_society_spec,
    generate,
    level1_of,
    make_society_spec,
    site_populations,
    transition_tally,
    write_bundle,
)
from borderflux.trajectories import displacement_probability_profile

SMALL = dict(
    seed=7,
    n_level1_regions=3,
    n_subcommunities_per_region=2,
    n_antennas=40,
    n_users=40,
    days=7,
    n_colocated_groups=2,
)


@pytest.fixture(scope="module")
def society():
    return generate(make_society_spec(**SMALL))


class TestSpec:
    """Tests for society parameter validation."""

    def test_out_of_range_parameter(self):
        with pytest.raises(ValidationError, match="invalid society spec: rho"):
            make_society_spec(rho=1.5)

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError):
            make_society_spec(tribes=4)

    def test_more_subcommunities_than_antennas(self):
        spec = make_society_spec(n_antennas=10, n_users=1, days=1)
        with pytest.raises(ValidationError, match="infeasible"):
            generate(spec)

    def test_level1_geometry(self):
        spec = make_society_spec()
        xy = np.array([[0.0, 0.0], [0.0, 200.0], [200.0, 0.0]])
        np.testing.assert_array_equal(level1_of(xy, spec), [0, 1, 4])


class TestGenerate:
    """Tests for the generated antennas, partitions and events."""

    def test_deterministic_for_seed(self, society):
        again = generate(make_society_spec(**SMALL))
        pd.testing.assert_frame_equal(society.events, again.events)
        pd.testing.assert_frame_equal(society.antennas, again.antennas)
        assert society.manifest["tally"] == again.manifest["tally"]

    def test_seed_changes_output(self, society):
        other = generate(make_society_spec(**{**SMALL, "seed": 8}))
        assert not society.antennas.equals(other.antennas)

    def test_antenna_count_and_colocated_copies(self, society):
        antennas = society.antennas.set_index("antenna_id")
        assert len(antennas) == SMALL["n_antennas"]
        assert antennas.index.is_unique
        for copy, parent in society.manifest["groups"]["colocated"].items():
            assert antennas.loc[copy, "lon"] == antennas.loc[parent, "lon"]
            assert antennas.loc[copy, "lat"] == antennas.loc[parent, "lat"]

    def test_partitions_are_nested(self, society):
        tribe = society.partitions["tribe"]
        sub = society.partitions["sub"]
        assert set(tribe) == set(society.antennas["antenna_id"])
        assert len(set(tribe.values())) == 3
        for antenna, label in sub.items():
            assert label.startswith(tribe[antenna])
        assert set(society.partitions) == {"tribe", "sub", "grid", "grid_blocks"}

    def test_events_inside_simulated_days(self, society):
        spec = society.spec
        t = society.events["timestamp"]
        assert t.min() >= spec.start
        assert t.max() < spec.start + spec.days * 86400
        for _, group in society.events.groupby("user_id"):
            assert group["timestamp"].is_monotonic_increasing

    def test_manifest_tally_matches_events(self, society):
        tally = transition_tally(society.events)
        assert society.manifest["tally"] == [
            [a, b, n] for (a, b), n in sorted(tally.items())
        ]
        assert society.manifest["counts"]["transitions"] == sum(tally.values())

    def test_full_stay_keeps_every_transition_in_its_tribe(self):
        society = generate(make_society_spec(**{**SMALL, "rho": 1.0}))
        tribe = society.partitions["tribe"]
        crossing = [
            (a, b) for a, b, _ in society.manifest["tally"] if tribe[a] != tribe[b]
        ]
        assert crossing == []
        for trips in society.manifest["trips"].values():
            for _, origin, dest, kind, _ in trips:
                if kind == "morning":
                    assert tribe[origin] == tribe[dest]

    def test_capital_stay_probability_applies_to_capital_residents(self):
        spec = make_society_spec(**{**SMALL, "rho": 1.0, "capital_rho": 0.0})
        society = generate(spec)
        tribe = society.partitions["tribe"]
        capital_trips = 0
        for user, trips in society.manifest["trips"].items():
            resident = society.manifest["users"][user]["tribe"]
            for _, origin, dest, kind, _ in trips:
                if kind != "morning":
                    continue
                if resident == "T0":
                    capital_trips += 1
                    assert tribe[dest] != "T0"
                else:
                    assert tribe[dest] == resident
        assert capital_trips > 0

    def test_colocated_groups_hold_two_or_three_sites(self, society):
        colocated = society.manifest["groups"]["colocated"]
        copies_per_parent = Counter(colocated.values())
        assert len(copies_per_parent) == SMALL["n_colocated_groups"]
        assert set(copies_per_parent.values()) <= {1, 2}

    def test_colocated_group_sizes_vary(self):
        values = {"n_users": 1, "n_antennas": 80, "n_colocated_groups": 20}
        spec = make_society_spec(**{**SMALL, **values})
        colocated = generate(spec).manifest["groups"]["colocated"]
        assert set(Counter(colocated.values()).values()) == {1, 2}

    def test_homes_follow_voronoi_population(self, society):
        copies = set(society.manifest["groups"]["colocated"])
        antennas = society.antennas[~society.antennas["antenna_id"].isin(copies)]
        registry = AntennaRegistry.from_sites(
            [
                make_site(row.antenna_id, row.lon, row.lat)
                for row in antennas.itertuples()
            ],
            society.boundary,
        )
        expected = assign_population(build_voronoi(registry), society.raster)
        lon, lat = antennas["lon"].to_numpy(), antennas["lat"].to_numpy()
        np.testing.assert_allclose(
            site_populations(lon, lat, society.raster),
            expected.populations,
            rtol=1e-9,
        )


class TestBundle:
    """Tests for writing a society in the loader formats."""

    def test_bundle_round_trips_through_loaders(self, tmp_path):
        spec = make_society_spec(**{**SMALL, "n_users": 5})
        paths = write_bundle(spec, tmp_path)
        registry = load_antennas(paths["antennas"])
        assert len(registry) == SMALL["n_antennas"]
        scheme = load_partition(paths["partition:tribe"], "tribe", registry)
        assert len(scheme.labels) == 3
        events = load_events(paths["cdr"], registry)
        assert events.dropped_unknown_antenna == 0
        assert len(events) == 5
        assert (tmp_path / "population.json").is_file()
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["spec"]["seed"] == 7
        assert manifest["groups"]["capital_regions"] == ["T0"]

    def test_commute_peaks_recovered_from_bundle(self, tmp_path):
        spec = make_society_spec(seed=4, n_users=400, days=7, lunch_fraction=0.0)
        paths = write_bundle(spec, tmp_path)
        registry = load_antennas(paths["antennas"])
        events = load_events(paths["cdr"], registry)
        profile = displacement_probability_profile(
            events, registry, weekdays_only=True
        )
        centres = sorted(
            start + profile.window_minutes // 2 for start, _ in profile.peaks()[:2]
        )
        morning = spec.schedule.morning_hour * 60
        evening = spec.schedule.evening_hour * 60
        assert abs(centres[0] - morning) <= 40
        assert abs(centres[1] - evening) <= 40


class TestAcceptanceSociety:
    """Tests for the fixed-seed society with a porous capital."""

    def test_defaults_with_porous_capital(self):
        spec = acceptance_society_spec()
        assert (spec.n_level1_regions, spec.n_subcommunities_per_region) == (5, 3)
        assert (spec.n_antennas, spec.n_users, spec.days) == (200, 2000, 14)
        assert spec.rho == 0.9
        assert spec.capital_rho == ACCEPTANCE_CAPITAL_RHO < spec.rho
        assert make_society_spec().capital_rho is None

    def test_overrides(self):
        spec = acceptance_society_spec(n_users=10)
        assert spec.n_users == 10
        assert spec.capital_rho == ACCEPTANCE_CAPITAL_RHO
