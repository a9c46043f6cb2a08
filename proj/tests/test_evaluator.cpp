#include "gaitopt/error.hpp"
#include "gaitopt/evaluator.hpp"
#include "gaitopt/statics.hpp"
#include "gaitopt/support_polygon.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace gaitopt;

namespace {

double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

// A directed pair is a counterclockwise hull edge when every other point lies
// strictly to its left or on the segment itself.
std::set<std::pair<double, double>> hull_oracle(const std::vector<Point2>& pts) {
    std::set<std::pair<double, double>> vertices;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j || pts[i] == pts[j]) continue;
            bool edge = true;
            const Point2 d = pts[j] - pts[i];
            for (std::size_t k = 0; k < pts.size() && edge; ++k) {
                const double c = cross2(d, pts[k] - pts[i]);
                if (c < 0.0) edge = false;
                else if (c == 0.0) {
                    const double s = (pts[k] - pts[i]).dot(d) / d.squaredNorm();
                    if (s < 0.0 || s > 1.0) edge = false;
                }
            }
            if (edge) {
                vertices.insert({pts[i].x(), pts[i].y()});
                vertices.insert({pts[j].x(), pts[j].y()});
            }
        }
    return vertices;
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 d = b - a;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + s * d)).norm();
}

// Boundary discretization plus a half-plane inside test.
double signed_distance_oracle(const Point2& p, const std::vector<Point2>& hull) {
    const int per_edge = 4000;
    double best = INFINITY;
    bool inside = hull.size() >= 3;
    for (std::size_t e = 0; e < hull.size(); ++e) {
        const Point2& a = hull[e];
        const Point2& b = hull[(e + 1) % hull.size()];
        if (cross2(b - a, p - a) <= 0.0) inside = false;
        // Nearest sample, refined on its two neighbouring sub-segments.
        int arg = 0;
        double arg_d = INFINITY;
        for (int s = 0; s <= per_edge; ++s) {
            const double d = (p - (a + (b - a) * (s / static_cast<double>(per_edge)))).norm();
            if (d < arg_d) {
                arg_d = d;
                arg = s;
            }
        }
        const Point2 lo = a + (b - a) * (std::max(arg - 1, 0) / static_cast<double>(per_edge));
        const Point2 hi = a + (b - a) * (std::min(arg + 1, per_edge) / static_cast<double>(per_edge));
        best = std::min(best, segment_distance(p, lo, hi));
    }
    return inside ? best : -best;
}

std::vector<Eigen::Vector3d> up_normals(std::size_t k) { return std::vector<Eigen::Vector3d>(k, Eigen::Vector3d::UnitZ()); }

LegGeometry random_geometry(const LegModel& leg, std::mt19937_64& rng, JointState& q) {
    for (std::size_t j = 0; j < kJointsPerLeg; ++j)
        q.angles[j] = std::uniform_real_distribution<double>(leg.joint_limits[j].lower, leg.joint_limits[j].upper)(rng);
    HipMount hip;
    return leg_geometry(leg, q, hip);
}

DecisionVector uniform_dv(std::size_t legs, double stride, double speed, double height, double beta) {
    return {std::vector<double>(legs, stride), std::vector<double>(legs, speed), height, beta};
}

} // namespace

TEST_SUITE("evaluator.hull") {
    TEST_CASE("unit square corners plus centre give the four corners") {
        const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
        const auto hull = convex_hull(pts);
        REQUIRE(hull.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(cross2(hull[(i + 1) % 4] - hull[i], hull[(i + 2) % 4] - hull[(i + 1) % 4]) > 0.0);
    }

    TEST_CASE("collinear points reduce to the endpoints") {
        const std::vector<Point2> pts{{0, 0}, {0.5, 0.5}, {1, 1}};
        const auto hull = convex_hull(pts);
        REQUIRE(hull.size() == 2);
        std::set<std::pair<double, double>> got{{hull[0].x(), hull[0].y()}, {hull[1].x(), hull[1].y()}};
        CHECK(got == std::set<std::pair<double, double>>{{0, 0}, {1, 1}});
    }

    TEST_CASE("single point and duplicates") {
        const std::vector<Point2> pts{{0.3, 0.2}, {0.3, 0.2}};
        CHECK(convex_hull(pts).size() == 1);
        CHECK_THROWS_AS(convex_hull(std::vector<Point2>{}), StructuralError);
    }

    TEST_CASE("random clouds match the all-pairs edge oracle") {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Point2> pts(200);
            for (auto& p : pts) p = {n(rng), n(rng)};
            const auto hull = convex_hull(pts);
            std::set<std::pair<double, double>> got;
            for (const auto& p : hull) got.insert({p.x(), p.y()});
            CHECK(got == hull_oracle(pts));
            for (std::size_t i = 0; i < hull.size(); ++i) {
                const auto& a = hull[i];
                const auto& b = hull[(i + 1) % hull.size()];
                const auto& c = hull[(i + 2) % hull.size()];
                CHECK(cross2(b - a, c - b) > 0.0);
            }
        }
    }

    TEST_CASE("signed distance for the unit square") {
        const std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        const auto hull = convex_hull(sq);
        CHECK(std::abs(signed_distance_to_hull({0.5, 0.5}, hull) - 0.5) < 1e-15);
        CHECK(std::abs(signed_distance_to_hull({2.0, 0.5}, hull) + 1.0) < 1e-15);
        CHECK(std::abs(inscribed_radius(hull) - 0.5) < 1e-12);
    }

    TEST_CASE("degenerate hulls always give minus the distance") {
        const std::vector<Point2> seg{{0, 0}, {1, 0}};
        CHECK(std::abs(signed_distance_to_hull({0.5, 0.0}, seg)) < 1e-15);
        CHECK(std::abs(signed_distance_to_hull({0.5, 0.2}, seg) + 0.2) < 1e-15);
        const std::vector<Point2> pt{{1, 1}};
        CHECK(std::abs(signed_distance_to_hull({1, 2}, pt) + 1.0) < 1e-15);
        CHECK(inscribed_radius(seg) == 0.0);
    }

    TEST_CASE("random point and hull pairs match the boundary-sampling oracle") {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<Point2> pts(3 + trial % 6);
            for (auto& p : pts) p = {u(rng), u(rng)};
            const auto hull = convex_hull(pts);
            const Point2 q{1.5 * u(rng), 1.5 * u(rng)};
            CHECK(std::abs(signed_distance_to_hull(q, hull) - signed_distance_oracle(q, hull)) < 1e-6);
        }
    }

    TEST_CASE("inside margin never exceeds half the widest foot spacing") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<Point2> feet(3 + trial % 4);
            for (auto& p : feet) p = {u(rng), u(rng)};
            const Point2 q{u(rng), u(rng)};
            const double d = signed_distance_to_hull(q, convex_hull(feet));
            if (d < 0.0) continue;
            double widest = 0.0;
            for (const auto& a : feet)
                for (const auto& b : feet) widest = std::max(widest, (a - b).norm());
            CHECK(d <= 0.5 * widest);
        }
    }
}

TEST_SUITE("evaluator.contact") {
    TEST_CASE("four symmetric feet share the weight equally") {
        const std::vector<Eigen::Vector3d> feet{{0.2, 0.2, 0}, {0.2, -0.2, 0}, {-0.2, 0.2, 0}, {-0.2, -0.2, 0}};
        const double w = 40.0;
        const auto s = distribute_contact_forces(feet, Eigen::Vector3d(0, 0, 0.25), w, up_normals(4));
        CHECK(s.statically_feasible);
        for (const auto& f : s.forces) CHECK((f - Eigen::Vector3d(0, 0, w / 4.0)).norm() < 1e-9);
    }

    TEST_CASE("a single foot under the CoM carries everything") {
        const std::vector<Eigen::Vector3d> feet{{0.1, -0.2, 0.0}};
        const auto s = distribute_contact_forces(feet, Eigen::Vector3d(0.1, -0.2, 0.3), 25.0, up_normals(1));
        CHECK((s.forces[0] - Eigen::Vector3d(0, 0, 25.0)).norm() < 1e-12);
        CHECK(s.force_residual < 1e-9);
        CHECK(s.moment_residual < 1e-9);
    }

    TEST_CASE("three feet match a direct moment-system solve") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        int checked = 0;
        while (checked < 200) {
            std::vector<Eigen::Vector3d> feet(3);
            for (auto& f : feet) f = {u(rng), u(rng), -0.1};
            std::vector<Point2> ground{feet[0].head<2>(), feet[1].head<2>(), feet[2].head<2>()};
            const Eigen::Vector3d com(u(rng), u(rng), 0.2);
            const auto hull = convex_hull(ground);
            if (hull.size() < 3 || signed_distance_to_hull(com.head<2>(), hull) < 0.01) continue;
            const double w = 30.0;
            Eigen::Matrix3d a;
            Eigen::Vector3d b(w, 0.0, 0.0);
            for (int c = 0; c < 3; ++c) {
                a(0, c) = 1.0;
                a(1, c) = feet[c].y() - com.y();
                a(2, c) = feet[c].x() - com.x();
            }
            const Eigen::Vector3d fz = a.partialPivLu().solve(b);
            const auto s = distribute_contact_forces(feet, com, w, up_normals(3));
            REQUIRE(s.statically_feasible);
            for (int c = 0; c < 3; ++c) CHECK((s.forces[c] - Eigen::Vector3d(0, 0, fz[c])).norm() < 1e-9);
            ++checked;
        }
    }

    TEST_CASE("feasible random stances balance and keep normals non-negative") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.4, 0.4), h(-0.05, 0.05);
        const double deg = 0.2;
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<Eigen::Vector3d> feet(2 + trial % 5);
            std::vector<Eigen::Vector3d> normals;
            for (auto& f : feet) {
                f = {u(rng), u(rng), h(rng) - 0.25};
                normals.push_back(trial % 2 ? Eigen::Vector3d(-std::sin(deg), 0, std::cos(deg)) : Eigen::Vector3d::UnitZ());
            }
            const Eigen::Vector3d com(u(rng), u(rng), 0.0);
            const auto s = distribute_contact_forces(feet, com, 35.0, normals);
            if (!s.statically_feasible) continue;
            CHECK(s.force_residual < 1e-6);
            CHECK(s.moment_residual < 1e-6);
            for (std::size_t c = 0; c < feet.size(); ++c) CHECK(normals[c].dot(s.forces[c]) >= -1e-9);
        }
    }

    TEST_CASE("CoM outside the support is flagged but still yields forces") {
        const std::vector<Eigen::Vector3d> feet{{0, 0, 0}, {0.2, 0, 0}, {0, 0.2, 0}};
        const auto s = distribute_contact_forces(feet, Eigen::Vector3d(1.0, 1.0, 0.3), 20.0, up_normals(3));
        CHECK_FALSE(s.statically_feasible);
        REQUIRE(s.forces.size() == 3);
        for (const auto& f : s.forces) CHECK(f.allFinite());
    }

    TEST_CASE("input shape errors") {
        CHECK_THROWS_AS(distribute_contact_forces({}, Eigen::Vector3d::Zero(), 1.0, {}), StructuralError);
        const std::vector<Eigen::Vector3d> feet{{0, 0, 0}, {1, 0, 0}};
        CHECK_THROWS_AS(distribute_contact_forces(feet, Eigen::Vector3d::Zero(), 1.0, up_normals(1)), StructuralError);
    }
}

TEST_SUITE("evaluator.joints") {
    TEST_CASE("massless links pass the contact force through unchanged") {
        LegModel leg;
        leg.link_masses = {0.0, 0.0};
        const Eigen::Vector3d f(1.0, -2.0, 30.0);
        for (const auto& r : joint_reaction_forces(leg, f)) CHECK((r - f).norm() == 0.0);
    }

    TEST_CASE("swing legs carry only distal link weight") {
        const LegModel leg;
        const auto r = joint_reaction_forces(leg, Eigen::Vector3d::Zero());
        CHECK((r[2] - Eigen::Vector3d(0, 0, -kGravity * leg.link_masses[1])).norm() < 1e-15);
        CHECK((r[1] - Eigen::Vector3d(0, 0, -kGravity * leg.mass())).norm() < 1e-15);
    }

    TEST_CASE("hip reaction equals contact plus every link weight") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(-20.0, 20.0), m(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            LegModel leg;
            leg.link_masses = {m(rng), m(rng)};
            const Eigen::Vector3d f(u(rng), u(rng), u(rng));
            Eigen::Vector3d oracle = f;
            oracle.z() -= leg.link_masses[0] * kGravity;
            oracle.z() -= leg.link_masses[1] * kGravity;
            CHECK((joint_reaction_forces(leg, f)[0] - oracle).norm() < 1e-12);
        }
    }

    TEST_CASE("force along the shank puts no torque on the knee") {
        LegModel leg;
        leg.link_masses = {0.0, 0.0};
        std::mt19937_64 rng(7);
        for (int i = 0; i < 50; ++i) {
            JointState q;
            const auto g = random_geometry(leg, rng, q);
            const Eigen::Vector3d f = 17.0 * (g.foot - g.knee).normalized();
            CHECK(std::abs(joint_torques(leg, q, HipMount{}, f)[2]) < 1e-12);
            // Pure vertical load never loads the yaw joint.
            CHECK(std::abs(joint_torques(leg, q, HipMount{}, Eigen::Vector3d(0, 0, 9.0))[0]) < 1e-12);
        }
    }

    TEST_CASE("planar two-link arm: horizontal reach L under vertical load F gives F L at the shoulder") {
        LegModel leg;
        leg.link_masses = {0.0, 0.0};
        leg.link_lengths = {0.3, 0.25};
        const double f = 12.5;
        const auto tau = joint_torques(leg, JointState{}, HipMount{}, Eigen::Vector3d(0, 0, f));
        CHECK(std::abs(tau[1] - f * 0.55) < 1e-12);
        CHECK(std::abs(tau[2] - f * 0.25) < 1e-12);
    }

    TEST_CASE("random configurations satisfy the virtual-work identity") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-20.0, 20.0);
        const LegModel leg;
        const HipMount hip;
        const double h = 1e-6;
        auto work = [&](const JointState& q, const Eigen::Vector3d& f) {
            // Potential of the link point masses minus work done by the ground force.
            const auto g = leg_geometry(leg, q, hip);
            const double potential =
                kGravity * (leg.link_masses[0] * g.thigh_midpoint.z() + leg.link_masses[1] * g.shank_midpoint.z());
            return potential - f.dot(g.foot);
        };
        for (int i = 0; i < 100; ++i) {
            JointState q;
            random_geometry(leg, rng, q);
            const Eigen::Vector3d f(u(rng), u(rng), u(rng));
            const auto tau = joint_torques(leg, q, hip, f);
            for (std::size_t j = 0; j < kJointsPerLeg; ++j) {
                JointState a = q, b = q;
                a.angles[j] += h;
                b.angles[j] -= h;
                CHECK(std::abs(tau[j] - (work(a, f) - work(b, f)) / (2.0 * h)) < 1e-6);
            }
            // Geometry-based and joint-based evaluation agree.
            const auto tau_g = joint_torques(leg, leg_geometry(leg, q, hip), f);
            for (std::size_t j = 0; j < kJointsPerLeg; ++j) CHECK(std::abs(tau[j] - tau_g[j]) < 1e-12);
        }
    }
}

TEST_SUITE("evaluator.simulate") {
    TEST_CASE("near-static wave stands balanced without drifting sideways") {
        const auto robot = hexapod_preset();
        const auto s = build_schedule(GaitKind::wave, 6, uniform_dv(6, 0.05, 0.01, 0.10, 0.95));
        const auto trace = simulate(robot, s, Terrain::flat());
        CHECK(trace.failure == Failure::none);
        CHECK(std::abs(trace.dy) < 1e-9);
        CHECK(trace.unbalanced_samples == 0);
        double lo = INFINITY;
        for (const auto& r : trace.samples) lo = std::min(lo, r.support_margin);
        CHECK(lo > 0.0);
    }

    TEST_CASE("a swing apex beyond the short leg's reach is unreachable") {
        LegModel leg;
        leg.link_lengths = {0.13, 0.13};
        StandardPosture posture;
        posture.standing_height = 0.20;
        const auto robot = make_symmetric_robot("short", 4, 2.0, 0.4, 0.3, leg, posture);
        const auto s = build_schedule(GaitKind::trot, 4, uniform_dv(4, 0.1, 0.1, 0.50, 0.6));
        const auto trace = simulate(robot, s, Terrain::flat());
        CHECK(trace.failure == Failure::unreachable);
        REQUIRE(trace.failure_sample.has_value());
        CHECK(trace.samples.size() < trace.samples_per_cycle * 3);
    }

    TEST_CASE("tripod climbs the step when the apex clears it and sticks otherwise") {
        const auto robot = hexapod_preset();
        const auto clears = build_schedule(GaitKind::tripod, 6, uniform_dv(6, 0.2, 0.1, 0.15, 0.6));
        const auto climb = simulate(robot, clears, Terrain::step(0.10, 0.5));
        CHECK(climb.failure == Failure::none);
        CHECK(climb.samples.back().com.x() > 0.5 + 0.5 * robot.body_length);
        CHECK(climb.samples.back().pose.position.z() > 0.10 + robot.posture.standing_height - 1e-9);

        const auto low = build_schedule(GaitKind::tripod, 6, uniform_dv(6, 0.2, 0.1, 0.02, 0.6), BoundsPolicy::unchecked);
        const auto stuck = simulate(robot, low, Terrain::step(0.10, 0.5));
        CHECK(stuck.failure == Failure::stuck);
        CHECK(stuck.blocked_samples > 0);
    }

    TEST_CASE("mirroring genome and phase table mirrors the walk") {
        for (GaitKind gait : {GaitKind::trot, GaitKind::tripod, GaitKind::wave, GaitKind::tetrapod}) {
            const std::size_t n = required_leg_count(gait);
            const auto robot = n == 4 ? quadruped_preset() : hexapod_preset();
            DecisionVector dv{std::vector<double>(n), std::vector<double>(n), 0.2, duty_factor_range(gait).first + 0.05};
            for (std::size_t i = 0; i < n; ++i) {
                dv.strides[i] = 0.08 + 0.02 * static_cast<double>(i);
                dv.swing_speeds[i] = 0.05 + 0.01 * static_cast<double>(i);
            }
            const auto s = build_schedule(gait, n, dv);
            auto m = s;
            for (std::size_t i = 0; i < n; i += 2) {
                std::swap(m.strides[i], m.strides[i + 1]);
                std::swap(m.swing_speeds[i], m.swing_speeds[i + 1]);
                std::swap(m.phase_offsets[i], m.phase_offsets[i + 1]);
            }
            const auto a = simulate(robot, s, Terrain::flat());
            const auto b = simulate(robot, m, Terrain::flat());
            CHECK(std::abs(a.dy) > 1e-4);  // the asymmetric genome does veer
            CHECK(std::abs(a.dx - b.dx) < 1e-9);
            CHECK(std::abs(a.dy + b.dy) < 1e-9);
        }
    }

    TEST_CASE("identical inputs give identical traces") {
        const auto robot = hexapod_preset();
        const auto s = build_schedule(GaitKind::tetrapod, 6, uniform_dv(6, 0.15, 0.07, 0.2, 0.75));
        SimulationConfig cfg;
        cfg.record_detail = true;
        const auto a = simulate(robot, s, Terrain::slope(), cfg);
        const auto b = simulate(robot, s, Terrain::slope(), cfg);
        REQUIRE(a.samples.size() == b.samples.size());
        CHECK(a.torques == b.torques);
        CHECK(a.joint_force_norms == b.joint_force_norms);
        CHECK(a.dx == b.dx);
        CHECK(a.dy == b.dy);
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            CHECK(a.samples[k].com == b.samples[k].com);
            CHECK(a.samples[k].joint_force_sum == b.samples[k].joint_force_sum);
            CHECK(a.samples[k].stance_mask == b.samples[k].stance_mask);
        }
    }

    TEST_CASE("sample count is control rate times simulated duration") {
        const auto robot = quadruped_preset();
        for (double rate : {240.0, 100.0}) {
            const auto s = build_schedule(GaitKind::trot, 4, uniform_dv(4, 0.13, 0.07, 0.2, 0.63));
            SimulationConfig cfg;
            cfg.control_rate = rate;
            const auto trace = simulate(robot, s, Terrain::flat(), cfg);
            const double duration = s.period * cfg.cycles;
            CHECK(trace.samples.size() == trace.samples_per_cycle * 3);
            CHECK(std::abs(static_cast<double>(trace.samples.size()) - rate * duration) <= 0.5 * cfg.cycles);
            CHECK(std::abs(trace.dt * rate - 1.0) < 0.5 / static_cast<double>(trace.samples_per_cycle));
            CHECK(trace.measured_cycles == 2.0);
            CHECK(trace.first_measured == trace.samples_per_cycle);
            for (std::size_t k = 1; k < trace.samples.size(); ++k)
                CHECK(std::abs(trace.samples[k].t - trace.samples[k - 1].t - trace.dt) < 1e-12);
        }
    }

    TEST_CASE("statically feasible samples balance forces and moments") {
        for (const auto& terrain : {Terrain::flat(), Terrain::slope(), Terrain::step()}) {
            const auto robot = hexapod_preset();
            const auto s = build_schedule(GaitKind::tripod, 6, uniform_dv(6, 0.2, 0.1, 0.2, 0.65));
            const auto trace = simulate(robot, s, terrain);
            std::size_t feasible = 0;
            for (const auto& r : trace.samples) {
                if (!r.statically_feasible) continue;
                ++feasible;
                CHECK(r.force_residual < 1e-6);
                CHECK(r.moment_residual < 1e-6);
            }
            CHECK(feasible > 0);
        }
    }

    TEST_CASE("torque flag fires exactly when some joint exceeds the limit") {
        for (double limit : {12.0, 3.0, 1.0}) {
            auto robot = quadruped_preset();
            for (auto& leg : robot.legs) leg.torque_limit = limit;
            const auto s = build_schedule(GaitKind::trot, 4, uniform_dv(4, 0.2, 0.1, 0.3, 0.6));
            SimulationConfig cfg;
            cfg.record_detail = true;
            const auto trace = simulate(robot, s, Terrain::flat(), cfg);
            REQUIRE(trace.torques.size() == trace.samples.size() * robot.joint_count());
            const bool any = std::any_of(trace.torques.begin(), trace.torques.end(),
                                         [&](double t) { return std::abs(t) > limit; });
            CHECK(trace.torque_exceeded == any);
            if (trace.failure == Failure::none || trace.failure == Failure::torque_exceeded)
                CHECK((trace.failure == Failure::torque_exceeded) == any);
            CHECK((trace.torque_violation > 0.0) == any);
        }
    }

    TEST_CASE("a tight fall threshold turns two-foot trot support into a fall") {
        const auto robot = quadruped_preset();
        const auto s = build_schedule(GaitKind::trot, 4, uniform_dv(4, 0.2, 0.1, 0.2, 0.55));
        SimulationConfig cfg;
        cfg.fall_threshold = 1e-4;
        const auto trace = simulate(robot, s, Terrain::flat(), cfg);
        CHECK(trace.failure == Failure::fell);
        REQUIRE(trace.failure_sample.has_value());
        CHECK(trace.samples[*trace.failure_sample].support_margin < -1e-4);
    }

    TEST_CASE("configuration and shape errors") {
        SimulationConfig cfg;
        cfg.control_rate = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.warmup_cycles = 3;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        const auto robot = hexapod_preset();
        const auto s = build_schedule(GaitKind::trot, 4, uniform_dv(4, 0.1, 0.1, 0.2, 0.6));
        CHECK_THROWS_AS(simulate(robot, s, Terrain::flat()), StructuralError);
        for (Failure f : {Failure::none, Failure::fell, Failure::stuck, Failure::unreachable, Failure::torque_exceeded})
            CHECK(parse_failure(to_string(f)) == f);
    }
}
