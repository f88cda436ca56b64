#include <ostream>

#include <fmt/format.h>

#include "irswarm/cli.hpp"

namespace irswarm::cli {

namespace {

template <typename T>
std::string cell(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string{};
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const sim::TraceEvent> trace) {
    out << "tick,agent_id,event,frame_type,sender,target,classification,value_a,value_b\n";
    for (const auto& e : trace) {
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", e.tick, e.agent_id, sim::to_string(e.kind),
                           e.frame_type, cell(e.sender), cell(e.target), e.classification,
                           cell(e.value_a), cell(e.value_b));
    }
}

void write_metrics_header(std::ostream& out) {
    out << "seed,total_receptions,decode_failures,loss_rate,collisions,time_to_alignment,"
           "final_spread_deg,misclassifications\n";
}

void write_metrics_row(std::ostream& out, const sim::Metrics& m) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", m.seed, m.total_receptions, m.decode_failures,
                       m.message_loss_rate, m.collisions, cell(m.time_to_alignment), m.final_spread_deg,
                       m.misclassifications);
}

}  // namespace irswarm::cli
