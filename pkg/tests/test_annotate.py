"""
Tests for candidate rendering, spacing and the arrow datasets.
"""

import numpy as np
import pytest


def _geometry(center, label, depth=0.0, start=None):
    from src.action_space import ArrowGeometry

    return ArrowGeometry(start_px=start or center, end_px=center, depth=depth, label_id=label)


class TestDepthToStyle:
    """Tests for depth_to_style."""

    def test_far_end_is_red_and_small(self):
        """Motion away from the camera: color_far, 0.6 x base radius."""
        from src.annotate import AnnotationStyle, depth_to_style

        style = AnnotationStyle()
        color, radius = depth_to_style(0.2, -0.2, 0.2, style)
        assert color == style.color_far
        assert radius == pytest.approx(0.6 * style.label_radius_px)

    def test_near_end_is_blue_and_large(self):
        """Motion toward the camera: color_near, 1.4 x base radius."""
        from src.annotate import AnnotationStyle, depth_to_style

        style = AnnotationStyle()
        color, radius = depth_to_style(-0.2, -0.2, 0.2, style)
        assert color == style.color_near
        assert radius == pytest.approx(1.4 * style.label_radius_px)

    def test_midpoint(self):
        """The midpoint depth gets the mixed color and the base radius."""
        from src.annotate import AnnotationStyle, depth_to_style

        style = AnnotationStyle()
        color, radius = depth_to_style(0.0, -0.2, 0.2, style)
        assert color == (128, 0, 128)
        assert radius == pytest.approx(style.label_radius_px)

    def test_degenerate_range(self):
        """A zero-width range styles everything as the midpoint."""
        from src.annotate import AnnotationStyle, depth_to_style

        style = AnnotationStyle()
        _, radius = depth_to_style(0.0, 0.0, 0.0, style)
        assert radius == pytest.approx(style.label_radius_px)

    def test_out_of_range(self):
        """Depths outside the range raise."""
        from src.annotate import AnnotationStyle, depth_to_style
        from src.errors import OutOfRangeDepth

        with pytest.raises(OutOfRangeDepth):
            depth_to_style(0.5, -0.2, 0.2, AnnotationStyle())


class TestEnforceSpacing:
    """Tests for enforce_spacing."""

    def test_coincident_centers(self):
        """Total collision keeps only the first label."""
        from src.annotate import enforce_spacing

        geometries = [_geometry((50.0, 50.0), label) for label in range(1, 6)]
        assert enforce_spacing(geometries, 10.0) == [1]

    def test_spacing_disabled(self):
        """min_spacing_px = 0 keeps everything."""
        from src.annotate import enforce_spacing

        geometries = [_geometry((50.0, 50.0), label) for label in range(1, 6)]
        assert enforce_spacing(geometries, 0.0) == [1, 2, 3, 4, 5]

    def test_line_keeps_every_other(self):
        """Centers 10 px apart with a 15 px minimum keep every other label."""
        from src.annotate import enforce_spacing

        geometries = [_geometry((10.0 * i, 0.0), i + 1) for i in range(7)]
        assert enforce_spacing(geometries, 15.0) == [1, 3, 5, 7]

    def test_multi_marker_label_dropped_whole(self):
        """A label with one crowded marker is dropped with all its markers."""
        from src.annotate import enforce_spacing

        geometries = [
            _geometry((0.0, 0.0), 1),
            _geometry((100.0, 100.0), 2),
            _geometry((2.0, 0.0), 2),
        ]
        assert enforce_spacing(geometries, 10.0) == [1]


class TestRender:
    """Tests for render."""

    def test_single_marker(self, small_image):
        """One zero-depth candidate draws label 1 and leaves the input intact."""
        from src.annotate import AnnotationStyle, render

        original = small_image.copy()
        annotated = render(small_image, [_geometry((80.0, 60.0), 1)], (0.0, 0.0), AnnotationStyle())
        assert annotated.label_ids == [1]
        assert np.array_equal(small_image, original)
        assert not np.array_equal(annotated.pixels, original)
        # label circle is filled white at its center
        assert tuple(annotated.pixels[60, 80]) != (128, 128, 128)

    def test_ten_arrows(self, blank_image):
        """Ten nav2d arrows give ten labels."""
        from src.annotate import AnnotationStyle, render

        geometries = [
            _geometry((40.0 + 60.0 * i, 200.0), i + 1, start=(320.0, 479.0)) for i in range(10)
        ]
        annotated = render(blank_image, geometries, (0.0, 0.0), AnnotationStyle())
        assert annotated.label_ids == list(range(1, 11))
        assert annotated.size == (640, 480)

    def test_depth_endpoints_colored(self, blank_image):
        """Ring colors follow the depth spectrum."""
        from src.annotate import AnnotationStyle, render

        style = AnnotationStyle()
        geometries = [
            _geometry((100.0, 100.0), 1, depth=-0.2),
            _geometry((400.0, 300.0), 2, depth=0.2),
        ]
        annotated = render(blank_image, geometries, (-0.2, 0.2), style)
        near_radius = int(round(1.4 * style.label_radius_px))
        far_radius = int(round(0.6 * style.label_radius_px))

        def ring(row, col):
            return {tuple(int(c) for c in annotated.pixels[row, col + d]) for d in (-1, 0, 1)}

        assert tuple(style.color_near) in ring(100, 100 + near_radius)
        assert tuple(style.color_far) in ring(300, 400 + far_radius)

    def test_empty(self, small_image):
        """Nothing to draw is an error."""
        from src.annotate import AnnotationStyle, render
        from src.errors import EmptyCandidateSet

        with pytest.raises(EmptyCandidateSet):
            render(small_image, [], (0.0, 0.0), AnnotationStyle())

    def test_label_map_must_match(self, small_image, nav2d_spec):
        """The label map covers exactly the drawn labels."""
        from src.annotate import AnnotationStyle, render
        from src.errors import AnnotationError

        with pytest.raises(AnnotationError):
            render(
                small_image,
                [_geometry((10.0, 10.0), 1)],
                (0.0, 0.0),
                AnnotationStyle(),
                labels={2: nav2d_spec.action((10.0, 10.0))},
            )

    def test_label_radius_must_fit_font(self):
        """Label circles must hold the digits."""
        from pydantic import ValidationError

        from src.annotate import AnnotationStyle

        with pytest.raises(ValidationError):
            AnnotationStyle(label_radius_px=4, font_height_px=14)


class TestBuildCandidates:
    """Tests for build_candidates."""

    def test_labels_round_trip(self, blank_image, nav2d_spec):
        """Every label maps to an action whose geometry is the drawn one."""
        from src.action_space import action_to_geometry
        from src.annotate import AnnotationStyle, build_candidates
        from src.optimize import init_distribution, sample

        rng = np.random.default_rng(3)
        dist = init_distribution(nav2d_spec)
        annotated = build_candidates(
            blank_image,
            nav2d_spec,
            None,
            lambda n: sample(dist, n, rng),
            10,
            AnnotationStyle(),
            (0.0, 0.0),
        )
        assert sorted(annotated.labels) == list(range(1, len(annotated.labels) + 1))
        assert annotated.label_ids == sorted(annotated.labels)
        drawn = {g.label_id: g.end_px for g in annotated.geometries}
        for label, action in annotated.labels.items():
            [geometry] = action_to_geometry(nav2d_spec, None, action, label, (640, 480))
            assert geometry.end_px == drawn[label]

    def test_crowded_candidates_top_up(self, blank_image, nav2d_spec):
        """Crowded draws are replaced from the sampler."""
        from src.annotate import AnnotationStyle, build_candidates

        draws = iter(
            [
                [nav2d_spec.action((100.0, 100.0)), nav2d_spec.action((101.0, 100.0))],
                [nav2d_spec.action((300.0, 100.0))],
            ]
        )
        annotated = build_candidates(
            blank_image, nav2d_spec, None, lambda n: next(draws), 2, AnnotationStyle(), (0.0, 0.0)
        )
        assert [a.components for a in annotated.labels.values()] == [
            (100.0, 100.0),
            (300.0, 100.0),
        ]

    def test_behind_camera_rejected(self, camera):
        """cart3d draws behind the camera never become candidates."""
        from src.action_space import ActionSpaceSpec
        from src.annotate import AnnotationStyle, build_candidates
        from src.errors import EmptyCandidateSet

        spec = ActionSpaceSpec(kind="cart3d", lower=(-2, -2, -2), upper=(2, 2, 2))
        image = np.zeros((480, 640, 3), dtype=np.uint8)
        with pytest.raises(EmptyCandidateSet):
            build_candidates(
                image,
                spec,
                camera,
                lambda n: [spec.action((0.0, 0.0, -1.5))] * n,
                3,
                AnnotationStyle(),
                (-2.0, 2.0),
            )


class TestArrowDataset:
    """Tests for the arrow-robustness datasets."""

    def test_thickness_axis(self):
        """One color, three thicknesses, one ratio and one direction give three images."""
        from src.annotate import ArrowGrid, gen_arrow_dataset

        grid = ArrowGrid(
            colors=["red"], thicknesses=[2, 4, 6], arrowhead_ratios=[0.1], directions=["up+right"]
        )
        samples = gen_arrow_dataset(grid)
        assert len(samples) == 3
        assert {s.answer for s in samples} == {"up and to the right"}
        assert [s.thickness for s in samples] == [2, 4, 6]

    def test_empty_grid(self):
        """An empty axis gives an empty dataset."""
        from src.annotate import ArrowGrid, gen_arrow_dataset

        assert gen_arrow_dataset(ArrowGrid(colors=[])) == []

    def test_deterministic(self):
        """Same seed gives identical images."""
        from src.annotate import OBJECT_REFERENTIAL, ArrowGrid, gen_arrow_dataset

        grid = ArrowGrid(colors=["blue"], thicknesses=[3], arrowhead_ratios=[0.3])
        first = gen_arrow_dataset(grid, mode=OBJECT_REFERENTIAL, seed=11)
        second = gen_arrow_dataset(grid, mode=OBJECT_REFERENTIAL, seed=11)
        assert all(np.array_equal(a.image, b.image) for a, b in zip(first, second))
        assert [a.answer for a in first] == [b.answer for b in second]

    def test_referential_answers_are_labels(self):
        """Object-referential answers are arrow numbers 1-4."""
        from src.annotate import OBJECT_REFERENTIAL, ArrowGrid, gen_arrow_dataset

        samples = gen_arrow_dataset(ArrowGrid(colors=["green"]), mode=OBJECT_REFERENTIAL)
        assert {s.answer for s in samples} <= {"1", "2", "3", "4"}
        assert all(s.target in s.query for s in samples)

    def test_unknown_values(self):
        """Unknown grid values are rejected."""
        from src.annotate import ArrowGrid

        with pytest.raises(ValueError):
            ArrowGrid(colors=["chartreuse"])

    def test_write_dataset(self, tmp_path):
        """The writer produces one PNG per sample and a manifest line each."""
        import json

        from src.annotate import ArrowGrid, gen_arrow_dataset, write_arrow_dataset

        grid = ArrowGrid(colors=["red"], thicknesses=[2], arrowhead_ratios=[0.1, 0.3])
        manifest = write_arrow_dataset(gen_arrow_dataset(grid), str(tmp_path / "arrows"))
        lines = [json.loads(line) for line in manifest.read_text().splitlines()]
        assert len(lines) == 8
        assert all((tmp_path / "arrows" / line["image"]).exists() for line in lines)


class TestImageIO:
    """Tests for image reading and writing."""

    def test_write_then_read(self, tmp_path, small_image):
        """PNG output reads back as the same RGB raster."""
        from src.annotate import read_image, write_image

        small_image[10:20, 10:20] = (255, 0, 0)
        path = write_image(tmp_path / "nested" / "frame.png", small_image)
        assert np.array_equal(read_image(path), small_image)

    def test_missing_image(self, tmp_path):
        """Missing files raise ImageIOError with the path."""
        from src.annotate import read_image
        from src.errors import ImageIOError

        with pytest.raises(ImageIOError) as exc_info:
            read_image(tmp_path / "absent.png")
        assert "absent.png" in str(exc_info.value)
