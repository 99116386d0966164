#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "geoflow/validate.hpp"
#include "support.hpp"

using namespace geoflow;
using testsupport::bundled_registry;
using testsupport::bundled_table;
using testsupport::load_graph;

namespace {

std::set<ConstraintId> violated_set(const ValidationReport& r) {
    std::set<ConstraintId> out;
    for (const auto& v : r.violations) out.insert(v.constraint);
    return out;
}

ValidationReport check(const GeoFlowGraph& g) {
    return validate(g, bundled_registry(), bundled_table());
}

}  // namespace

TEST(Validate, EveryShippedWorkflowIsWellFormed) {
    for (const auto& name : testsupport::corpus_names()) {
        if (name.rfind("wf", 0) != 0) continue;
        ValidationReport r = check(load_graph(name));
        EXPECT_TRUE(r.well_formed) << name << ": " << serialize_report(r);
    }
}

TEST(Validate, EveryBrokenGraphNamesItsConstraint) {
    // Filenames encode the single constraint each graph is built to break.
    int broken = 0;
    for (const auto& name : testsupport::corpus_names()) {
        if (name.rfind("bad_", 0) != 0) continue;
        ++broken;
        ConstraintId expected;
        switch (name[5]) {
            case '1': expected = ConstraintId::G1_Acyclicity; break;
            case '2': expected = ConstraintId::G2_RoleOrdering; break;
            case '3': expected = ConstraintId::G3_TypeCompatibility; break;
            case '4': expected = ConstraintId::G4_DataAvailability; break;
            default: expected = ConstraintId::G5_Connectivity; break;
        }
        ValidationReport r = check(load_graph(name));
        EXPECT_FALSE(r.well_formed) << name;
        EXPECT_EQ(violated_set(r), std::set<ConstraintId>{expected}) << name;
    }
    EXPECT_EQ(broken, 10);
}

TEST(Validate, CorpusHasTwoGraphsPerConstraint) {
    std::map<char, int> per;
    for (const auto& name : testsupport::corpus_names())
        if (name.rfind("bad_", 0) == 0) per[name[5]]++;
    for (char c : {'1', '2', '3', '4', '5'}) EXPECT_EQ(per[c], 2) << "G" << c;
}

TEST(Validate, CycleReportsOneViolationPerComponent) {
    ValidationReport r = check(load_graph("bad_g1_two_node_cycle"));
    int cycles = 0;
    for (const auto& v : r.violations)
        if (v.constraint == ConstraintId::G1_Acyclicity) ++cycles;
    EXPECT_EQ(cycles, 1);
}

TEST(Validate, StrandedNodeIsTheOnlyConnectivityWitness) {
    ValidationReport r = check(load_graph("bad_g5_stranded_node"));
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].constraint, ConstraintId::G5_Connectivity);
    EXPECT_NE(r.violations[0].witness.find("stranded"), std::string::npos)
        << r.violations[0].witness;
}

TEST(Validate, RoleOrderViolationNamesTheEdge) {
    ValidationReport r = check(load_graph("bad_g2_support_to_cond"));
    ASSERT_FALSE(r.violations.empty());
    for (const auto& v : r.violations)
        EXPECT_EQ(v.constraint, ConstraintId::G2_RoleOrdering);
}

TEST(Validate, ReportIsOrderIndependent) {
    // Shuffling node and edge input order must not change the verdict or
    // the set of violations; witnesses may come out in a different order.
    std::mt19937 rng(7);
    for (const auto& name : {"wf02_incident_rate", "bad_g3_attraction_grid",
                             "bad_g5_no_measure"}) {
        GeoFlowGraph g = load_graph(name);
        ValidationReport baseline = check(g);
        for (int round = 0; round < 5; ++round) {
            GeoFlowGraph shuffled = g;
            std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
            std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
            ValidationReport r = check(shuffled);
            EXPECT_EQ(r.well_formed, baseline.well_formed) << name;
            EXPECT_EQ(violated_set(r), violated_set(baseline)) << name;
            EXPECT_EQ(r.violations.size(), baseline.violations.size()) << name;
        }
    }
}

TEST(Validate, AllViolationsReportedNotJustTheFirst) {
    // A graph broken in two unrelated ways must surface both.
    GeoFlowGraph g = load_graph("wf03_museum_distance");
    // Break role ordering: demote the Measure sink's producer chain.
    ConceptNode stray;
    stray.id = "zz_orphan";
    stray.concept_ = CoreConcept::Object;
    stray.role = FunctionalRole::Cond;
    g.nodes.push_back(stray);  // connectivity break
    TransformEdge back;        // and a cycle, using two existing nodes
    back.from = g.edges.front().to;
    back.to = g.edges.front().from;
    back.op = "locate";
    g.edges.push_back(back);
    ValidationReport r = check(g);
    EXPECT_FALSE(r.well_formed);
    std::set<ConstraintId> got = violated_set(r);
    EXPECT_TRUE(got.count(ConstraintId::G1_Acyclicity));
    EXPECT_TRUE(got.count(ConstraintId::G5_Connectivity));
}

TEST(Validate, ConstraintNamesRoundTrip) {
    for (ConstraintId c :
         {ConstraintId::G1_Acyclicity, ConstraintId::G2_RoleOrdering,
          ConstraintId::G3_TypeCompatibility, ConstraintId::G4_DataAvailability,
          ConstraintId::G5_Connectivity}) {
        auto back = constraint_from_string(to_string(c));
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, c);
    }
    EXPECT_FALSE(constraint_from_string("G9_Nonsense").has_value());
}

TEST(Validate, EmptyGraphFailsConnectivityOnly) {
    GeoFlowGraph g;
    ValidationReport r = check(g);
    // No nodes means no Measure and no contextual anchor.
    EXPECT_FALSE(r.well_formed);
    for (const auto& v : r.violations)
        EXPECT_EQ(v.constraint, ConstraintId::G5_Connectivity);
}

TEST(Validate, SingleContextualNodeIsNotEnough) {
    GeoFlowGraph g;
    ConceptNode n;
    n.id = "only";
    n.concept_ = CoreConcept::Location;
    n.role = FunctionalRole::Extent;
    g.nodes.push_back(n);
    ValidationReport r = check(g);
    EXPECT_FALSE(r.well_formed);  // nothing to measure
}
