#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mallows/global_limit.hpp"
#include "mallows/harness.hpp"
#include "mallows/local_limit.hpp"
#include "mallows/mallows_process.hpp"
#include "mallows/permutation.hpp"
#include "mallows/rng.hpp"

namespace py = pybind11;
using namespace mallows;

namespace {

CounterRng stream(std::uint64_t seed, std::uint64_t index)
{
    return CounterRng::from_seed(seed).split(index);
}

std::vector<int> to_vector(const Permutation& p)
{
    return {p.values().begin(), p.values().end()};
}

struct PyZWindow
{
    PyZWindow(std::uint64_t seed, double T, int lo, int hi, std::uint64_t index)
        : window(stream(seed, index), T, lo, hi)
    {
    }
    ZWindow window;
};

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Birth Mallows process: finite simulation, global and local limits";

    m.def("sample_mallows", [](int n, double q, std::uint64_t seed, std::uint64_t index) {
        CounterRng rng = stream(seed, index);
        return to_vector(sample_mallows(n, q, rng));
    }, py::arg("n"), py::arg("q"), py::arg("seed") = 1, py::arg("index") = 0);
    m.def("enumerate_mallows", [](int n, double q) {
        FiniteDistribution d = enumerate_mallows(n, q);
        return std::vector<double>(d.masses().begin(), d.masses().end());
    }, py::arg("n"), py::arg("q"), "Probabilities indexed by lexicographic rank.");
    m.def("permutation_rank", [](const std::vector<int>& v) { return permutation_rank(v); });
    m.def("permutation_unrank", [](int n, std::uint64_t r) { return to_vector(permutation_unrank(n, r)); });
    m.def("left_inversions", [](const std::vector<int>& v) {
        InversionVector ell = left_inversion_vector(Permutation(v));
        return std::vector<int>(ell.values().begin(), ell.values().end());
    });
    m.def("decode_inversions", [](const std::vector<int>& ell) {
        return to_vector(decode_inversion_vector(InversionVector(ell)));
    });
    m.def("inversions", [](const std::vector<int>& v) { return inv_count(Permutation(v)); });

    m.def("rate_finite", &rate_finite, py::arg("i"), py::arg("j"), py::arg("q"));
    m.def("rate_limiting", &rate_limiting, py::arg("j"), py::arg("t"));
    m.def("z_curve", &z_curve, py::arg("x"), py::arg("a"), py::arg("t"));
    m.def("F_map", &F_map, py::arg("x"), py::arg("t"), py::arg("z"));
    m.def("inversion_fluid_limit", &inversion_fluid_limit, py::arg("x"), py::arg("a"), py::arg("t"));
    m.def("rho_density", &rho_density, py::arg("beta"), py::arg("x"), py::arg("y"));
    m.def("ode_solve", [](double x, double y0, double t0, double t1, double step) {
        OdeSolution s = ode_solve(x, y0, t0, t1, step);
        return py::make_tuple(s.t, s.y);
    }, py::arg("x"), py::arg("y0"), py::arg("t0"), py::arg("t1"), py::arg("step") = 1e-3);
    m.def("box_discrepancy", [](const std::vector<int>& v, double beta, int k) {
        return box_discrepancy(Permutation(v), beta, k);
    }, py::arg("permutation"), py::arg("beta"), py::arg("k") = 50);

    py::class_<MallowsProcessPath>(m, "ProcessPath")
        .def_property_readonly("n", &MallowsProcessPath::n)
        .def_property_readonly("q_horizon", &MallowsProcessPath::q_horizon)
        .def("total_jumps", &MallowsProcessPath::total_jumps)
        .def("permutation_at", [](const MallowsProcessPath& pp, double q) { return to_vector(permutation_at(pp, q)); })
        .def("inversions_at", [](const MallowsProcessPath& pp, double q) {
            InversionVector ell = pp.ell_at(q);
            return std::vector<int>(ell.values().begin(), ell.values().end());
        })
        .def("value_at", [](const MallowsProcessPath& pp, int i, double q) { return value_at(pp, i, q); });
    m.def("simulate_process", [](int n, double q_horizon, std::uint64_t seed, std::uint64_t index) {
        return simulate_process(n, q_horizon, stream(seed, index));
    }, py::arg("n"), py::arg("q_horizon"), py::arg("seed") = 1, py::arg("index") = 0);

    py::class_<PyZWindow>(m, "ZWindow")
        .def(py::init<std::uint64_t, double, int, int, std::uint64_t>(), py::arg("seed"), py::arg("T"),
             py::arg("lo"), py::arg("hi"), py::arg("index") = 0)
        .def("ell", [](PyZWindow& w, int i, double t) { return w.window.ell(i, t); })
        .def("sigma", [](PyZWindow& w, double t, int a, int b) {
            ZPermutationSlice s = sigma_slice(w.window, t, a, b);
            std::vector<bool> exact;
            for (Certification c : s.flags) {
                exact.push_back(c == Certification::exact);
            }
            return py::make_tuple(s.values, exact);
        }, py::arg("t"), py::arg("a"), py::arg("b"))
        .def("jump_log", [](PyZWindow& w, int a, int b) {
            std::vector<py::tuple> out;
            for (const TranspositionEvent& e : jump_log(w.window, a, b)) {
                out.push_back(py::make_tuple(e.time, e.i, e.partner));
            }
            return out;
        }, py::arg("a"), py::arg("b"))
        .def("balance", [](PyZWindow& w, double t) {
            BalanceCheck b = balance_check(w.window, t);
            py::dict d;
            d["certified"] = b.certified;
            d["half_width"] = b.half_width;
            d["left_to_right"] = b.left_to_right;
            d["right_to_left"] = b.right_to_left;
            return d;
        });

    m.def("coupled_simulation", [](int n, int k_n, int lo, int hi, double T, std::uint64_t seed, std::uint64_t index) {
        CouplingRecord r = coupled_simulation(n, k_n, lo, hi, T, stream(seed, index));
        py::dict d;
        d["agree"] = r.agree;
        d["all_agree"] = r.all_agree;
        d["certified"] = r.certified;
        d["ratios"] = r.ratios;
        d["proposed"] = r.proposed;
        d["accepted"] = r.accepted;
        return d;
    }, py::arg("n"), py::arg("k_n"), py::arg("lo"), py::arg("hi"), py::arg("T"), py::arg("seed") = 1,
       py::arg("index") = 0);

    m.def("run_experiment", [](const std::string& config) {
        harness::ExperimentConfig c = harness::config_from_json(nlohmann::json::parse(config));
        harness::ExperimentReport r;
        {
            py::gil_scoped_release release;
            r = harness::run(c);
        }
        return harness::report_to_json(r).dump();
    }, py::arg("config_json"), "Runs an experiment from a JSON config and returns the JSON report.");
}
