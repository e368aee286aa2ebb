// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when a
// criterion fails that is not in the known-red list below.
#include <chrono>
#include <exception>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "nmd/audit_log.h"
#include "nmd/eval.h"
#include "nmd/formula.h"
#include "nmd/walker.h"
#include "support.h"

using namespace nmd;
using namespace nmd::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

// Criteria that cannot pass as stated; see README.
const std::set<std::string> kKnownRed = {"whatif-end-to-end"};

const char* kNamedText =
    "MAX(SecDI.ExposureResidualMaturity [SecDI.SecurityID = SEC_GteeADJ.SecurityID AND "
    "SecDI1.LinkFlag = 1])";
const char* kA1Text =
    "=MAX(IF(SECDI!$B$5:$B$754=SEC_GTEEADJ!$B5,IF(SECDI1!$C$5:$C$754=1,SECDI!$L$5:$L$754)))";

Outcome golden_round_trip() {
  Workbook b = fixture("fix_b.nmd.json");
  CellAddress host{"SEC_GTEEADJ", 13, 5};
  std::string compiled = compile_conditional_text(kNamedText, b, host).text();
  if (compiled != kA1Text) return {false, "compiled to " + compiled};
  std::string back = decompile_text(compiled, b, host);
  if (back != kNamedText) return {false, "decompiled to " + back};
  return {true, "exact match both ways"};
}

Outcome semantic_oracle() {
  Rng rng(101);
  const int cases = 600;
  for (int i = 0; i < cases; ++i) {
    Workbook w = random_table_workbook(rng, 200);
    ConditionalAggregate c = random_conditional(rng, w, true);
    Sheet* hs = w.find_sheet("HOST");
    int row = hs->first_data_row + static_cast<int>(rng() % static_cast<unsigned>(hs->last_data_row - hs->first_data_row + 1));
    CellAddress host{"HOST", 13, row};
    CompiledFormula f = compile_conditional(c, w, host);
    hs->cells[host.a1()] = CellContent::formula(f.text(), true);
    CellValue got = value_of(w, recalculate(w), host);
    CellValue want = brute_force(w, c, host);
    if (got != want) {
      return {false, "case " + std::to_string(i) + " " + f.text() + ": " + got.to_display() + " vs " + want.to_display()};
    }
  }
  return {true, std::to_string(cases) + " cases equal"};
}

Outcome parser_round_trips() {
  Rng rng(102);
  const int cases = 1200;
  for (int i = 0; i < cases; ++i) {
    Expr e = random_a1_expr(rng, 4);
    std::string text = print_a1(e);
    if (!equal(parse_a1(text), e)) return {false, "A1 mismatch on " + text};
  }
  Workbook ctx = naming_context();
  for (int i = 0; i < cases; ++i) {
    Expr e = random_named_expr(rng, ctx, 4);
    std::string text = print_named(e, ctx);
    NamedItem item = parse_named(text, ctx);
    Expr back = std::holds_alternative<Expr>(item) ? std::get<Expr>(item) : to_expr(std::get<ConditionalAggregate>(item));
    if (!equal(back, e)) return {false, "named mismatch on " + text};
  }
  return {true, std::to_string(cases) + " A1 and " + std::to_string(cases) + " named"};
}

std::set<CellAddress> row_cells(const std::vector<WalkRow>& rows, const Model& m) {
  std::set<CellAddress> out;
  for (const auto& r : rows) {
    if (const auto* c = std::get_if<CellAddress>(&r.target)) out.insert(*c);
    for (const auto& c : expand_target(m.workbook, r.target)) out.insert(c);
  }
  return out;
}

Outcome graph_duality() {
  Rng rng(103);
  const int books = 120;
  std::size_t cells = 0;
  for (int i = 0; i < books; ++i) {
    auto m = Model::build(random_workbook(rng));
    const DependencyGraph& g = m->graph;
    for (const auto& cell : g.nodes()) {
      ++cells;
      for (const auto& p : g.precedents(cell)) {
        if (!g.dependents(p).count(cell)) return {false, "dependents miss " + cell.to_string()};
      }
      for (const auto& d : g.dependents(cell)) {
        if (!g.precedents(d).count(cell)) return {false, "precedents miss " + cell.to_string()};
      }
      Inspection ins = inspect(*m, cell);
      if (row_cells(ins.precedents, *m) != g.precedents(cell) || row_cells(ins.dependents, *m) != g.dependents(cell)) {
        return {false, "walker neighbourhood differs at " + cell.to_string()};
      }
    }
  }
  return {true, std::to_string(books) + " workbooks, " + std::to_string(cells) + " cells"};
}

Outcome history_replay() {
  AuditLog log;
  Workbook base = fixture("fix_a.nmd.json");
  base.version = 86;
  base.revision = 1;
  replay_model_history(log, base);
  std::string text = render_history(log.history());
  if (text != kModelHistoryReport) return {false, "report differs:\n" + text};
  return {true, "14 commits, report string-exact"};
}

Outcome classification() {
  Rng rng(104);
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    Workbook a = random_role_workbook(rng);
    Mutation m = random_mutation(rng, a);
    auto io = [](const Sheet* s) { return s && s->role != SheetRole::Calculation; };
    bool version = io(a.find_sheet(m.sheet)) || io(m.after.find_sheet(m.sheet));
    Classification want = version ? Classification::VersionChange : Classification::RevisionChange;
    Classification got = diff(a, m.after).classification;
    if (got != want) {
      return {false, m.what + " on " + m.sheet + ": " + std::string(classification_name(got))};
    }
  }
  return {true, std::to_string(cases) + " mutations"};
}

Outcome export_stamp() {
  AuditLog log;
  Workbook a = fixture("fix_a.nmd.json");
  Workbook b = a;
  b.find_sheet("INPUTS")->cells["C5"] = CellContent::literal(CellValue::number(1));
  CommitResult r = log.commit(a, b, "427240", Timestamp::parse("26/05/2009 10:55"), "R17 Version passed to CIT 26 05 2009");
  ExportResult e = log.export_model(r.workbook, "427240", Timestamp::parse("26/05/2009 11:01:01"));
  const std::string want = "Exported by: 427240 on 26/05/2009 11:01:01";
  auto comments = log.records().back().comments;
  if (e.comment != want || comments.size() != 1 || comments[0].text != want) return {false, "got '" + e.comment + "'"};
  return {true, want};
}

Outcome whatif_end_to_end() {
  Workbook w = fixture("fix_a_extended.nmd.json");
  auto changes = what_if(w, {{"In.Key", CellValue::number(2)}});
  std::map<CellAddress, std::pair<CellValue, CellValue>> want = {
      {{"SEC_GTEEADJ", 13, 5}, {CellValue::number(10), CellValue::number(30)}},
      {{"OUTPUTS", 2, 5}, {CellValue::number(10), CellValue::number(30)}},
  };
  std::map<CellAddress, std::pair<CellValue, CellValue>> got;
  std::ostringstream os;
  for (const auto& c : changes) {
    got[c.cell] = {c.before, c.after};
    os << " " << c.cell.to_string() << ":" << c.before.to_display() << "->" << c.after.to_display();
  }
  if (got != want) return {false, "delta was" + os.str()};
  return {true, "delta was" + os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    std::string id;
    std::function<Outcome()> check;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"conditional-golden-round-trip", golden_round_trip, 1},
      {"conditional-semantic-oracle", semantic_oracle, 30},
      {"parser-round-trips", parser_round_trips, 0},
      {"graph-duality", graph_duality, 0},
      {"history-replay", history_replay, 0},
      {"change-classification", classification, 0},
      {"export-stamp", export_stamp, 0},
      {"whatif-end-to-end", whatif_end_to_end, 0},
  };
  int unexpected = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      o = {false, "took " + std::to_string(seconds) + " s, budget " + std::to_string(c.budget_seconds) + " s"};
    }
    bool known = kKnownRed.count(c.id) > 0;
    std::ostringstream secs;
    secs.precision(3);
    secs << std::fixed << seconds;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  (" << secs.str() << " s)  " << o.detail
              << (!o.pass && known ? "  [known red]" : "") << "\n";
    if (!o.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
