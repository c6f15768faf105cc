"""Scenario configuration, validation and presets."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uavntn.config import SECTIONS, ConfigError, ScenarioConfig, preset, preset_names
from uavntn.engine import drop_state


class TestValidation:
    def test_defaults_valid(self):
        cfg = ScenarioConfig()
        assert cfg.mode == "standalone_tn"
        assert cfg.power.tn_power == 46.0
        assert cfg.noise.bs_noise_figure == 7.0 and cfg.noise.ue_noise_figure == 9.0

    def test_elevation_range_message(self):
        with pytest.raises(ConfigError, match=r"deployment\.elevation = 95 outside valid range \(0, 90\]"):
            ScenarioConfig().replace(**{"deployment.elevation": 95.0})

    @pytest.mark.parametrize(
        "key,value",
        [
            ("simulation.n_drops", 0),
            ("deployment.frf", 2),
            ("simulation.mode", "teleport"),
            ("power.alpha", 1.2),
            ("traffic.h_uav", 10.0),
            ("deployment.isd", float("nan")),
            ("simulation.n_fading", 2.5),
            ("traffic.max_floors", 2),
        ],
    )
    def test_rejections(self, key, value):
        with pytest.raises(ConfigError, match=key.split(".")[0]):
            ScenarioConfig().replace(**{key: value})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config key deployment.altitude"):
            ScenarioConfig().replace(**{"deployment.altitude": 1.0})

    def test_indoor_height_limit(self):
        with pytest.raises(ConfigError, match="22.5"):
            ScenarioConfig().replace(**{"traffic.max_floors": 10})

    @given(
        st.floats(min_value=1.0, max_value=90.0),
        st.sampled_from([1, 3]),
        st.integers(min_value=1, max_value=500),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_dict_round_trip(self, elev, frf, drops, ratio):
        cfg = ScenarioConfig().replace(
            **{
                "deployment.elevation": elev,
                "deployment.frf": frf,
                "simulation.n_drops": drops,
                "traffic.uav_ratio": ratio,
            }
        )
        assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


class TestPresets:
    def test_fourteen_names(self):
        names = preset_names()
        assert len(names) == 14 == len(set(names))

    def test_unknown_lists_available(self):
        with pytest.raises(ConfigError, match="case3.standalone"):
            preset("case4.standalone")

    def test_table_values(self):
        c3 = preset("case3.standalone")
        assert c3.traffic.uav_ratio == 0.071
        assert preset("case2.relief").traffic.uav_ratio == 0.007
        assert c3.deployment.isd == 500.0 and c3.deployment.area == 52e6
        assert c3.traffic.h_uav == 150.0 and c3.spectrum.fc == 2.0
        assert c3.spectrum.tn_dl_bw == c3.spectrum.tn_ul_bw == 10e6
        assert c3.power.p0 == -85.0 and c3.power.alpha == 0.8 and c3.power.p_max == 23.0
        assert c3.deployment.hpbw == 4.41 and c3.deployment.orbit_altitude == 600e3

    def test_offload_bands(self):
        f3 = preset("case3.offload_90_frf3")
        assert (f3.spectrum.ntn_dl_bw, f3.spectrum.ntn_ul_bw) == (10e6, 10e6)
        f1 = preset("case2.offload_87_frf1")
        assert (f1.spectrum.ntn_dl_bw, f1.spectrum.ntn_ul_bw) == (30e6, 30e6)
        assert f1.deployment.elevation == 87.0 and f1.mode == "tn_ntn_offload"

    @pytest.mark.parametrize("case,lo,hi", [("case2", 65, 85), ("case3", 680, 760)])
    def test_uav_population(self, case, lo, hi):
        cfg = preset(f"{case}.standalone")
        counts = [drop_state(cfg, d)[1].n_uav for d in range(3)]
        assert lo <= np.mean(counts) <= hi

    def test_every_preset_validates(self):
        for name in preset_names():
            cfg = preset(name)
            for sec in SECTIONS:
                assert dataclasses.is_dataclass(getattr(cfg, sec))
