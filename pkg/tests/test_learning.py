"""Bandit layer: factored problems, index policies, induced responses,
and coupled experimentation comparisons."""

import random
from fractions import Fraction

import pytest

from pcekit.extensive_catalog import (
    beer_quiche_tree,
    link_tree,
    restaurant_tree,
    simultaneous_tree,
)
from pcekit.games import StrategicGame
from pcekit.learning import (
    BeliefState,
    GittinsPolicy,
    History,
    ResponsePath,
    UcbPolicy,
    bayes_ucb_index,
    coupled_compare,
    default_quantile_choice,
    factored_problem,
    gittins_index,
    gittins_truncation_bound,
    induced_response,
    run_policy,
    uniform_environment,
)

from oracles import gittins_oracle

F = Fraction


def median_choice(n):
    # starts at the posterior median instead of the pessimistic floor
    return 1 - F(1, n + 2)


def coupling_game():
    """Three players; "me" has a non-separable two-set interaction."""
    table = {
        ("x", "u"): F(5),
        ("x", "v"): F(1),
        ("y", "u"): F(2),
        ("y", "v"): F(-1),
    }

    def payoff(profile):
        me, a, b = profile
        mine = table[(a, b)] if me == "in" else F(0)
        return (mine, F(0), F(0))

    game = StrategicGame.of(
        ("me", "A", "B"), (("in", "out"), ("x", "y"), ("u", "v")), payoff
    )
    return simultaneous_tree(game)


@pytest.fixture(scope="module")
def restaurant():
    ext = restaurant_tree()
    return ext, factored_problem(ext, "critic"), factored_problem(ext, "diner")


@pytest.fixture(scope="module")
def link_anti():
    ext = link_tree("anti")
    return ext, factored_problem(ext, "N1"), factored_problem(ext, "N2")


class TestFactoredProblem:
    def test_restaurant_critic_shape(self, restaurant):
        _, pc, _ = restaurant
        assert pc.strategies == ("R", "Z")
        assert pc.relevant_of("R") == ("h_diner", "h_restaurant")
        assert pc.relevant_of("Z") == ()
        assert pc.actions_of("h_restaurant") == ("H", "L")
        assert pc.belief_sets == ("h_diner", "h_restaurant")

    def test_restaurant_payoffs(self, restaurant):
        _, pc, pd = restaurant
        assert pc.payoff("R", ("R", "H")) == F(3, 2)
        assert pc.payoff("R", ("Z", "H")) == F(2)
        assert pc.payoff("R", ("R", "L")) == F(-3, 2)
        assert pc.payoff("R", ("Z", "L")) == F(-1)
        assert pc.payoff("Z", ()) == 0
        assert pd.payoff("R", ("R", "H")) == F(1, 2)
        assert pd.payoff("R", ("Z", "L")) == F(-2)

    def test_restaurant_rewards_reconstruct(self, restaurant):
        _, pc, pd = restaurant
        for p in (pc, pd):
            for s in p.strategies:
                for combo in p.combo_space(s):
                    total = sum(
                        p.rewards[h][a]
                        for h, a in zip(p.relevant_of(s), combo)
                    )
                    assert total == p.payoff(s, combo)

    def test_restaurant_reward_differences(self, restaurant):
        # only reward differences are pinned; the level is a gauge choice
        _, pc, pd = restaurant
        assert pc.rewards["h_diner"]["R"] - pc.rewards["h_diner"]["Z"] == F(-1, 2)
        assert pc.rewards["h_restaurant"]["H"] - pc.rewards["h_restaurant"]["L"] == 3
        assert pd.rewards["h_critic"]["R"] - pd.rewards["h_critic"]["Z"] == F(-1, 2)
        assert pd.rewards["h_restaurant"]["H"] - pd.rewards["h_restaurant"]["L"] == 3

    def test_link_reward_differences(self, link_anti):
        _, p1, p2 = link_anti
        gain = lambda p, h: p.rewards[h]["Active"] - p.rewards[h]["Inactive"]
        assert gain(p1, "h_S1") == 16 and gain(p1, "h_S2") == -4
        assert gain(p2, "h_S1") == 11 and gain(p2, "h_S2") == -9

    def test_unfactorable_player_raises(self):
        ext = restaurant_tree()
        with pytest.raises(ValueError, match="not factorable"):
            factored_problem(ext, "restaurant")
        with pytest.raises(ValueError, match="not factorable"):
            factored_problem(beer_quiche_tree(), "receiver")

    def test_non_separable_problem_has_no_rewards(self):
        p = factored_problem(coupling_game(), "me")
        assert p.rewards is None
        assert p.payoff("in", ("x", "u")) == 5
        assert p.payoff("in", ("y", "v")) == -1

    def test_observation_law_uniform(self, restaurant):
        ext, pc, _ = restaurant
        law = dict(pc.observation_law(uniform_environment(ext), "R"))
        assert law == {
            ("R", "H"): F(1, 4),
            ("R", "L"): F(1, 4),
            ("Z", "H"): F(1, 4),
            ("Z", "L"): F(1, 4),
        }
        assert pc.observation_law(uniform_environment(ext), "Z") == [((), 1)]

    def test_observation_law_point_mass(self, restaurant):
        _, pc, _ = restaurant
        sigma = {"diner": {"Z": 1}, "restaurant": {"H": 1}}
        assert pc.observation_law(sigma, "R") == [(("Z", "H"), 1)]

    def test_environment_validation(self, restaurant):
        _, pc, _ = restaurant
        with pytest.raises(ValueError, match="misses player"):
            pc.clean_environment({"diner": {"Z": 1}})
        bad = {"diner": {"Z": F(1, 2)}, "restaurant": {"H": 1}}
        with pytest.raises(ValueError, match="not a distribution"):
            pc.clean_environment(bad)


class TestBeliefAndHistory:
    def test_uniform_and_mapping_priors(self, restaurant):
        _, pc, _ = restaurant
        b = BeliefState.uniform(pc, 2)
        assert b.row("h_diner") == {"R": 2, "Z": 2}
        b = BeliefState.of(
            pc, {"h_diner": {"R": 3, "Z": 1}, "h_restaurant": {"H": 1, "L": 1}}
        )
        assert b.row("h_diner") == {"R": 3, "Z": 1}

    def test_prior_must_be_positive(self, restaurant):
        _, pc, _ = restaurant
        with pytest.raises(ValueError, match="positive"):
            BeliefState.uniform(pc, 0)

    def test_observe_is_functional(self, restaurant):
        _, pc, _ = restaurant
        b = BeliefState.uniform(pc, 1)
        b2 = b.observe("h_diner", "R")
        assert b.row("h_diner") == {"R": 1, "Z": 1}
        assert b2.row("h_diner") == {"R": 2, "Z": 1}
        assert b2.row("h_restaurant") == {"H": 1, "L": 1}

    def test_history_counts_and_subhistories(self):
        h = History.empty()
        h = h.record("R", {"h_diner": "Z", "h_restaurant": "H"})
        h = h.record("Z", {})
        h = h.record("R", {"h_diner": "R", "h_restaurant": "H"})
        assert h.count("R") == 2 and h.count("Z") == 1
        assert len(h.subhistory("R")) == 2
        assert h.action_counts("h_restaurant") == {"H": 2}
        assert h.action_counts("h_diner") == {"Z": 1, "R": 1}

    def test_history_check_against(self, restaurant):
        _, pc, _ = restaurant
        good = History.empty().record(
            "R", {"h_diner": "Z", "h_restaurant": "H"}
        )
        good.check_against(pc)
        bad = History.empty().record("R", {"h_diner": "Z"})
        with pytest.raises(ValueError, match="observes"):
            bad.check_against(pc)


class TestResponsePath:
    def test_deterministic_given_seed(self, restaurant):
        ext, _, _ = restaurant
        sigma = uniform_environment(ext)
        a = ResponsePath(ext, sigma, seed=3)
        b = ResponsePath(ext, sigma, seed=3)
        assert [a.assignment(t) for t in range(1, 30)] == [
            b.assignment(t) for t in range(1, 30)
        ]
        c = ResponsePath(ext, sigma, seed=4)
        assert any(
            a.assignment(t) != c.assignment(t) for t in range(1, 30)
        )

    def test_draws_vary_over_time(self, restaurant):
        ext, _, _ = restaurant
        path = ResponsePath(ext, uniform_environment(ext), seed=0)
        seen = {path.entry(t, "h_restaurant") for t in range(1, 40)}
        assert seen == {"H", "L"}

    def test_within_player_correlation_kept(self):
        # receiver mixes two constant plans: its two sets always agree
        ext = beer_quiche_tree()
        sigma = uniform_environment(ext)
        sigma = {
            **sigma,
            "receiver": {
                "beer=duel,quiche=duel": F(1, 2),
                "beer=retreat,quiche=retreat": F(1, 2),
            },
        }
        path = ResponsePath(ext, sigma, seed=5)
        for t in range(1, 50):
            assert path.entry(t, "beer") == path.entry(t, "quiche")

    def test_counts_start_at_one(self, restaurant):
        ext, _, _ = restaurant
        path = ResponsePath(ext, uniform_environment(ext), seed=0)
        with pytest.raises(ValueError, match="start at 1"):
            path.entry(0, "h_diner")


class TestUcbIndex:
    def test_uniform_prior_median(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(1), F(1)),))
        aux = {"h": {"a": F(1), "b": F(0)}}
        ix = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: F(1, 2)
        )
        assert ix == pytest.approx(0.5, abs=1e-9)

    def test_skewed_posterior_median(self):
        # two successes, one failure: median of the mean is sqrt(1/2)
        belief = BeliefState(("h",), (("a", "b"),), ((F(2), F(1)),))
        aux = {"h": {"a": F(1), "b": F(0)}}
        ix = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: F(1, 2)
        )
        assert ix == pytest.approx(0.5**0.5, abs=1e-9)

    def test_history_updates_posterior(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(1), F(1)),))
        aux = {"h": {"a": F(1), "b": F(0)}}
        hist = History.empty().record("s", {"h": "a"})
        ix = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", hist, lambda n: F(1, 2)
        )
        assert ix == pytest.approx(0.5**0.5, abs=1e-9)

    def test_decreasing_orientation(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(2), F(1)),))
        aux = {"h": {"a": F(0), "b": F(1)}}
        ix = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: F(1, 2)
        )
        assert ix == pytest.approx(1 - 0.5**0.5, abs=1e-9)

    def test_boundary_quantiles_hit_extremes(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(1), F(1)),))
        aux = {"h": {"a": F(3), "b": F(-2)}}
        lo = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: 0
        )
        hi = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: 1
        )
        assert lo == -2.0 and hi == 3.0

    def test_sums_over_sets(self, restaurant):
        _, pc, _ = restaurant
        belief = BeliefState.uniform(pc, 1)
        ix = bayes_ucb_index(
            belief,
            dict(pc.relevant),
            pc.rewards,
            "R",
            History.empty(),
            lambda n: F(1, 2),
        )
        # both per-set medians sit at the midpoint under a uniform prior
        mid = sum(
            (pc.rewards[h]["R" if h == "h_diner" else "H"]
             + pc.rewards[h]["Z" if h == "h_diner" else "L"]) / 2
            for h in ("h_diner", "h_restaurant")
        )
        assert ix == pytest.approx(float(mid), abs=1e-9)

    def test_empty_relevant_set_scores_zero(self, restaurant):
        _, pc, _ = restaurant
        belief = BeliefState.uniform(pc, 1)
        ix = bayes_ucb_index(
            belief, dict(pc.relevant), pc.rewards, "Z", History.empty(),
            lambda n: F(1, 2),
        )
        assert ix == 0.0

    def test_requires_separability(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(1), F(1)),))
        with pytest.raises(ValueError, match="separable"):
            bayes_ucb_index(
                belief, {"s": ("h",)}, None, "s", History.empty(), lambda n: 0.5
            )

    def test_three_action_monte_carlo(self):
        belief = BeliefState(("h",), (("a", "b", "c"),), ((F(1), F(1), F(1)),))
        aux = {"h": {"a": F(1), "b": F(0), "c": F(-1)}}
        ix = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: F(1, 2)
        )
        assert ix == pytest.approx(0.0, abs=0.02)
        again = bayes_ucb_index(
            belief, {"s": ("h",)}, aux, "s", History.empty(), lambda n: F(1, 2)
        )
        assert again == ix


class TestGittinsIndex:
    BELIEF = BeliefState(("h",), (("a", "b"),), ((F(1), F(1)),))
    PAY = {"h": {"a": F(1), "b": F(0)}}

    def test_zero_discount_is_myopic_mean(self):
        ix = gittins_index(self.BELIEF, ("h",), self.PAY, 0, horizon=9)
        assert ix == pytest.approx(0.5, abs=1e-12)

    def test_matches_stopping_rule_oracle_at_shared_depth(self):
        oracle = gittins_oracle((1, 1), (F(1), F(0)), F(1, 2), 4)
        ix = gittins_index(self.BELIEF, ("h",), self.PAY, F(1, 2), horizon=4)
        assert ix == pytest.approx(float(oracle), abs=1e-9)

    def test_deep_truncation_within_bound_of_shallow_oracle(self):
        oracle = float(gittins_oracle((1, 1), (F(1), F(0)), F(1, 2), 4))
        ix = gittins_index(self.BELIEF, ("h",), self.PAY, F(1, 2), horizon=12)
        bound = gittins_truncation_bound(1, F(1, 2), 4)
        assert bound == pytest.approx(0.125)
        assert oracle <= ix <= oracle + bound

    def test_monotone_in_horizon(self):
        vals = [
            gittins_index(self.BELIEF, ("h",), self.PAY, F(1, 2), horizon=T)
            for T in (1, 2, 3, 4, 6, 9)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        skewed = BeliefState(("h",), (("a", "b"),), ((F(1), F(3)),))
        vals = [
            gittins_index(skewed, ("h",), self.PAY, F(3, 4), horizon=T)
            for T in (1, 2, 4, 7)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_exceeds_myopic_mean_under_uncertainty(self):
        ix = gittins_index(self.BELIEF, ("h",), self.PAY, F(1, 2), horizon=6)
        assert ix > 0.5

    def test_constant_arm_is_its_payoff(self):
        belief = BeliefState(("h",), (("a", "b"),), ((F(2), F(5)),))
        pay = {"h": {"a": F(7), "b": F(7)}}
        for beta in (0, F(1, 2), F(9, 10)):
            assert gittins_index(belief, ("h",), pay, beta, horizon=6) == 7.0

    def test_no_sets_means_known_constant(self):
        belief = BeliefState((), (), ())
        assert gittins_index(belief, (), lambda c: F(-3), F(1, 2)) == -3.0

    def test_joint_payoff_callable(self):
        # non-separable interaction handled through the joint predictive
        ext = coupling_game()
        p = factored_problem(ext, "me")
        belief = BeliefState.uniform(p, 1)
        ix = gittins_index(
            belief,
            p.relevant_of("in"),
            lambda combo: p.payoff("in", combo),
            0,
            horizon=5,
        )
        assert ix == pytest.approx(float(F(5 + 1 + 2 - 1, 4)), abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match="discount"):
            gittins_index(self.BELIEF, ("h",), self.PAY, 1)
        with pytest.raises(ValueError, match="horizon"):
            gittins_index(self.BELIEF, ("h",), self.PAY, F(1, 2), horizon=0)


class FlatPolicy:
    """Constant-index policy: every strategy scores alike."""

    label = "flat"

    def _engine(self, problem, gamma):
        class Engine:
            @staticmethod
            def index(strategy, counts_key, n_plays):
                return 1.0

        return Engine()


class TestRunPolicy:
    def test_deterministic(self, link_anti):
        ext, p1, _ = link_anti
        sigma = uniform_environment(ext)
        prior = BeliefState.uniform(p1, 1)
        policy = UcbPolicy(q=median_choice)
        a = run_policy(policy, p1, prior, ResponsePath(ext, sigma, 9), 20)
        b = run_policy(policy, p1, prior, ResponsePath(ext, sigma, 9), 20)
        assert a == b

    def test_ties_break_toward_earlier_strategy(self, restaurant):
        ext, pc, _ = restaurant
        path = ResponsePath(ext, uniform_environment(ext), 1)
        seq = run_policy(FlatPolicy(), pc, BeliefState.uniform(pc, 1), path, 8)
        assert seq == ("R",) * 8

    def test_optimistic_start_explores(self, link_anti):
        # N1's median Active index starts at (16-4)/2 - 14 + 14 = 6 > 0
        ext, p1, _ = link_anti
        path = ResponsePath(ext, uniform_environment(ext), 2)
        seq = run_policy(
            UcbPolicy(q=median_choice), p1, BeliefState.uniform(p1, 1), path, 5
        )
        assert seq[0] == "Active"

    def test_pessimistic_floor_never_leaves_opt_out(self, restaurant):
        # q(0) = 0 scores each arm by its worst case: both roles sit at Z
        ext, pc, pd = restaurant
        path = ResponsePath(ext, uniform_environment(ext), 3)
        for p in (pc, pd):
            seq = run_policy(
                UcbPolicy(), p, BeliefState.uniform(p, 1), path, 10
            )
            assert seq == ("Z",) * 10

    def test_gittins_policy_explores_then_settles(self, restaurant):
        ext, pc, _ = restaurant
        sigma = {"critic": {"Z": 1}, "diner": {"Z": 1}, "restaurant": {"L": 1}}
        path = ResponsePath(ext, sigma, 4)
        seq = run_policy(
            GittinsPolicy(F(9, 10), 8),
            pc,
            BeliefState.uniform(pc, 1),
            path,
            12,
            gamma=F(9, 10),
        )
        assert seq[0] == "R"
        assert seq[-1] == "Z"

    def test_horizon_validation(self, restaurant):
        ext, pc, _ = restaurant
        path = ResponsePath(ext, uniform_environment(ext), 0)
        with pytest.raises(ValueError, match="horizon"):
            run_policy(UcbPolicy(), pc, BeliefState.uniform(pc, 1), path, 0)


class TestInducedResponse:
    def test_zero_gamma_is_first_period_point_mass(self, link_anti):
        ext, p1, _ = link_anti
        sigma = uniform_environment(ext)
        prior = BeliefState.uniform(p1, 1)
        for method in ("exact-horizon", "monte-carlo"):
            resp = induced_response(
                UcbPolicy(q=median_choice), p1, prior, sigma, 0,
                method=method, horizon=6, n_paths=50, seed=1,
            )
            assert resp.of("Active") == 1
            assert resp.of("Inactive") == 0
            assert resp.error_bound == 0

    def test_exact_totals_and_absorbed_tail(self, restaurant):
        ext, pc, _ = restaurant
        resp = induced_response(
            UcbPolicy(), pc, BeliefState.uniform(pc, 1),
            uniform_environment(ext), F(1, 2), method="exact-horizon",
            horizon=10,
        )
        assert resp.distribution["Z"] == 1 - F(1, 2) ** 10
        assert resp.distribution["R"] == 0
        assert resp.error_bound == F(1, 2) ** 10
        assert resp.total + resp.error_bound == 1

    def test_exact_matches_monte_carlo(self, link_anti):
        ext, p1, _ = link_anti
        sigma = uniform_environment(ext)
        prior = BeliefState.uniform(p1, 1)
        policy = UcbPolicy(q=median_choice)
        exact = induced_response(
            policy, p1, prior, sigma, F(1, 2), method="exact-horizon",
            horizon=12,
        )
        mc = induced_response(
            policy, p1, prior, sigma, F(1, 2), method="monte-carlo",
            horizon=12, n_paths=1500, seed=21,
        )
        assert abs(exact.total - mc.total) < 1e-9
        for s in p1.strategies:
            se = max(mc.standard_error[s], 1e-9)
            assert abs(float(exact.of(s)) - mc.of(s)) <= 3 * se

    def test_monte_carlo_metadata(self, restaurant):
        ext, pc, _ = restaurant
        resp = induced_response(
            GittinsPolicy(F(1, 2), 6), pc, BeliefState.uniform(pc, 1),
            uniform_environment(ext), F(1, 2), method="monte-carlo",
            horizon=8, n_paths=40, seed=2,
        )
        assert resp.method == "monte-carlo"
        assert resp.n_paths == 40
        assert set(resp.standard_error) == {"R", "Z"}
        assert resp.total == pytest.approx(1 - 0.5**8, abs=1e-12)

    def test_validation(self, restaurant):
        ext, pc, _ = restaurant
        prior = BeliefState.uniform(pc, 1)
        sigma = uniform_environment(ext)
        with pytest.raises(ValueError, match="gamma"):
            induced_response(UcbPolicy(), pc, prior, sigma, 1)
        with pytest.raises(ValueError, match="method"):
            induced_response(UcbPolicy(), pc, prior, sigma, 0, method="nope")
        with pytest.raises(ValueError, match="n_paths"):
            induced_response(
                UcbPolicy(), pc, prior, sigma, 0, method="monte-carlo",
                n_paths=0,
            )


class TestPathCouplingIsDistributionNeutral:
    def test_shared_paths_match_fresh_sampling(self, link_anti):
        """Reading a pre-drawn path at visit counts induces the same play
        law as sampling observations independently each period."""
        ext, p1, _ = link_anti
        sigma = uniform_environment(ext)
        prior = BeliefState.uniform(p1, 1)
        policy = UcbPolicy(q=median_choice)
        gamma, horizon, reps = F(9, 10), 15, 1500

        mc = induced_response(
            policy, p1, prior, sigma, gamma, method="monte-carlo",
            horizon=horizon, n_paths=reps, seed=31,
        )

        engine = policy._engine(p1, gamma)
        law = {s: p1.observation_law(sigma, s) for s in p1.strategies}
        weights = [
            float((1 - gamma) * gamma ** (t - 1))
            for t in range(1, horizon + 1)
        ]
        rng = random.Random(77)
        sums = {s: 0.0 for s in p1.strategies}
        sq = {s: 0.0 for s in p1.strategies}
        for _ in range(reps):
            plays = {s: 0 for s in p1.strategies}
            counts = {
                h: tuple(prior.row(h)[a] for a in p1.actions_of(h))
                for s in p1.strategies
                for h in p1.relevant_of(s)
            }
            per = {s: 0.0 for s in p1.strategies}
            for t in range(horizon):
                best, best_ix = None, None
                for s in p1.strategies:
                    key = tuple(counts[h] for h in p1.relevant_of(s))
                    ix = engine.index(s, key, plays[s])
                    if best_ix is None or ix > best_ix:
                        best, best_ix = s, ix
                per[best] += weights[t]
                plays[best] += 1
                u, acc = rng.random(), 0.0
                for combo, pr in law[best]:
                    acc += float(pr)
                    if u <= acc:
                        break
                for h, a in zip(p1.relevant_of(best), combo):
                    j = p1.actions_of(h).index(a)
                    counts[h] = tuple(
                        v + 1 if i == j else v
                        for i, v in enumerate(counts[h])
                    )
            for s, v in per.items():
                sums[s] += v
                sq[s] += v * v
        for s in p1.strategies:
            mean = sums[s] / reps
            se = (max(sq[s] / reps - mean**2, 0.0) / reps) ** 0.5
            tol = 3 * (se + mc.standard_error[s]) + 1e-9
            assert abs(mean - mc.of(s)) <= tol


class TestCoupledCompare:
    PHI = {"Active": "Active", "Inactive": "Inactive"}

    def test_link_ucb_dominance_everywhere(self, link_anti):
        ext, p1, p2 = link_anti
        cmp = coupled_compare(
            p1, p2, UcbPolicy(q=median_choice), UcbPolicy(q=median_choice),
            self.PHI, "Active", uniform_environment(ext), F(9, 10),
            prior_i=BeliefState.uniform(p1, 1),
            prior_j=BeliefState.uniform(p2, 1),
            n_paths=800, horizon=25, seed=17,
        )
        assert cmp.dominant_paths == cmp.n_paths
        assert cmp.violations == 0
        assert cmp.dominance_rate == 1.0
        # the cheaper node experiments strictly more, and both do explore
        assert cmp.freq_j > 0.05
        assert cmp.freq_i > cmp.freq_j

    def test_link_gittins_dominance_everywhere(self, link_anti):
        ext, p1, p2 = link_anti
        cmp = coupled_compare(
            p1, p2, GittinsPolicy(F(9, 10), 8), GittinsPolicy(F(9, 10), 8),
            self.PHI, "Active", uniform_environment(ext), F(9, 10),
            prior_i=BeliefState.uniform(p1, 1),
            prior_j=BeliefState.uniform(p2, 1),
            n_paths=600, horizon=25, seed=18,
        )
        assert cmp.dominant_paths == cmp.n_paths
        assert cmp.freq_j > 0.05
        assert cmp.freq_i > cmp.freq_j

    def test_restaurant_roles(self, restaurant):
        ext, pc, pd = restaurant
        cmp = coupled_compare(
            pc, pd, GittinsPolicy(F(1, 2), 6), GittinsPolicy(F(1, 2), 6),
            {"R": "R", "Z": "Z"}, "R", uniform_environment(ext), F(1, 2),
            prior_i=BeliefState.uniform(pc, 1),
            prior_j=BeliefState.uniform(pd, 1),
            n_paths=400, horizon=20, seed=19,
        )
        assert cmp.dominant_paths == cmp.n_paths
        assert cmp.freq_i > 0
        assert cmp.freq_j == 0.0
        assert cmp.target_j == "R"

    def test_requires_isomorphic_factorings(self, link_anti):
        ext, p1, _ = link_anti
        ps1 = factored_problem(ext, "S1")
        with pytest.raises(ValueError, match="isomorphically"):
            coupled_compare(
                p1, ps1, UcbPolicy(), UcbPolicy(), self.PHI, "Active",
                uniform_environment(ext), F(1, 2),
                prior_i=BeliefState.uniform(p1, 1),
                prior_j=BeliefState.uniform(ps1, 1),
                n_paths=10, horizon=5,
            )

    def test_phi_must_biject(self, link_anti):
        ext, p1, p2 = link_anti
        with pytest.raises(ValueError, match="biject"):
            coupled_compare(
                p1, p2, UcbPolicy(), UcbPolicy(),
                {"Active": "Active", "Inactive": "Active"}, "Active",
                uniform_environment(ext), F(1, 2),
                prior_i=BeliefState.uniform(p1, 1),
                prior_j=BeliefState.uniform(p2, 1),
                n_paths=10, horizon=5,
            )

    def test_players_must_differ(self, restaurant):
        ext, pc, _ = restaurant
        with pytest.raises(ValueError, match="differ"):
            coupled_compare(
                pc, factored_problem(ext, "critic"), UcbPolicy(), UcbPolicy(),
                {"R": "R", "Z": "Z"}, "R", uniform_environment(ext), F(1, 2),
                prior_i=BeliefState.uniform(pc, 1),
                prior_j=BeliefState.uniform(pc, 1),
                n_paths=10, horizon=5,
            )

    def test_missing_environment_row(self, link_anti):
        ext, p1, p2 = link_anti
        sigma = {p: row for p, row in uniform_environment(ext).items() if p != "S2"}
        with pytest.raises(ValueError, match="misses"):
            coupled_compare(
                p1, p2, UcbPolicy(), UcbPolicy(), self.PHI, "Active",
                sigma, F(1, 2),
                prior_i=BeliefState.uniform(p1, 1),
                prior_j=BeliefState.uniform(p2, 1),
                n_paths=10, horizon=5,
            )


class TestDefaultQuantileChoice:
    def test_schedule(self):
        assert default_quantile_choice(0) == 0
        assert default_quantile_choice(1) == F(1, 2)
        assert default_quantile_choice(9) == F(9, 10)
