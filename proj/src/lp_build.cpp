#include "atomgrid/lp_build.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "atomgrid/errors.hpp"

namespace atomgrid::lp_build {

using lp::kInf;
using lp::Sense;
using lp::Term;

namespace {

constexpr double kPerMwh = 1e-3; // EUR/MWh -> MEUR/GWh

double potential(const std::map<std::string, double>& m, const std::string& region)
{
    const auto it = m.find(region);
    return it == m.end() ? kInf : it->second;
}

std::string block_name(std::size_t b)
{
    return fmt::format("b{}", b);
}

} // namespace

double network_annualization(const sys::EnergySystem& system)
{
    return costkit::idc_multiplier(system.network_finance) * costkit::annuity_factor(system.network_finance);
}

LpBuilder::LpBuilder(const sys::EnergySystem& system) : sys_(system)
{
    system.grid.validate();
    for (const auto& c : system.carriers) {
        if (!c.primary) {
            model_.balance_carriers.push_back(c.id);
        }
    }
    const auto nr = system.regions.size();
    const auto nc = model_.balance_carriers.size();
    const auto nb = system.grid.n_blocks;
    balance_terms_.assign(nr, std::vector<std::vector<std::vector<Term>>>(nc, std::vector<std::vector<Term>>(nb)));
}

std::size_t LpBuilder::carrier_slot(const std::string& carrier) const
{
    const auto& bc = model_.balance_carriers;
    const auto it = std::find(bc.begin(), bc.end(), carrier);
    return it == bc.end() ? kNone : static_cast<std::size_t>(it - bc.begin());
}

void LpBuilder::add_balance_term(std::size_t region, const std::string& carrier, std::size_t block,
                                 std::size_t col, double coef)
{
    const auto slot = carrier_slot(carrier);
    if (slot == kNone) {
        return; // primary carrier: drawn from a resource budget, not balanced
    }
    balance_terms_[region][slot][block].push_back({col, coef});
}

void LpBuilder::declare_variables()
{
    if (declared_) {
        throw Error("LpBuilder: variables already declared");
    }
    declared_ = true;
    auto& lp = model_.lp;
    const auto nb = sys_.grid.n_blocks;
    const auto& regions = sys_.regions;

    for (const auto& t : sys_.technologies) {
        ConversionIndex idx;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const auto& rid = regions[r].id;
            idx.cap.push_back(
                lp.add_variable(fmt::format("cap[{},{}]", t.id, rid), 0.0, potential(t.potential_max, rid)).index);
            std::vector<std::size_t> act;
            act.reserve(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto col = lp.add_variable(fmt::format("act[{},{},{}]", t.id, rid, block_name(b))).index;
                act.push_back(col);
                for (const auto& [c, eff] : t.outputs) {
                    add_balance_term(r, c, b, col, eff);
                }
                for (const auto& [c, share] : t.inputs) {
                    add_balance_term(r, c, b, col, -share);
                }
            }
            idx.act.push_back(std::move(act));
        }
        model_.conversion.push_back(std::move(idx));
    }

    for (const auto& n : sys_.nuclear) {
        NuclearIndex idx;
        idx.outputs.push_back("electricity");
        idx.outputs.insert(idx.outputs.end(), n.heat_outputs.begin(), n.heat_outputs.end());
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const auto& rid = regions[r].id;
            const double ub = n.excluded ? 0.0 : potential(n.potential_max, rid);
            idx.cap.push_back(lp.add_variable(fmt::format("cap[{},{}]", n.id(), rid), 0.0, ub).index);
            std::vector<std::vector<std::size_t>> gen(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                for (const auto& c : idx.outputs) {
                    const auto col = lp.add_variable(fmt::format("gen[{},{},{},{}]", n.id(), rid, block_name(b), c),
                                                     0.0, n.excluded ? 0.0 : kInf)
                                         .index;
                    gen[b].push_back(col);
                    add_balance_term(r, c, b, col, 1.0);
                }
            }
            idx.gen.push_back(std::move(gen));
        }
        model_.nuclear.push_back(std::move(idx));
    }

    for (const auto& s : sys_.storage) {
        StorageIndex idx;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const auto& rid = regions[r].id;
            idx.energy_cap.push_back(lp.add_variable(fmt::format("ecap[{},{}]", s.id, rid), 0.0,
                                                     potential(s.potential_energy_max, rid))
                                         .index);
            idx.power_cap.push_back(lp.add_variable(fmt::format("pcap[{},{}]", s.id, rid), 0.0,
                                                    potential(s.potential_power_max, rid))
                                        .index);
            std::vector<std::size_t> ch, dis, lvl;
            for (std::size_t b = 0; b < nb; ++b) {
                ch.push_back(lp.add_variable(fmt::format("charge[{},{},{}]", s.id, rid, block_name(b))).index);
                dis.push_back(lp.add_variable(fmt::format("discharge[{},{},{}]", s.id, rid, block_name(b))).index);
                lvl.push_back(lp.add_variable(fmt::format("level[{},{},{}]", s.id, rid, block_name(b))).index);
                add_balance_term(r, s.carrier, b, dis.back(), 1.0);
                add_balance_term(r, s.carrier, b, ch.back(), -1.0);
            }
            idx.charge.push_back(std::move(ch));
            idx.discharge.push_back(std::move(dis));
            idx.level.push_back(std::move(lvl));
        }
        model_.storage.push_back(std::move(idx));
    }

    for (const auto& c : sys_.transmission) {
        CorridorIndex idx;
        for (std::size_t k = 0; k < c.tranches.size(); ++k) {
            if (!(c.tranches[k].limit_gw > 0.0)) {
                throw ValidationError(fmt::format("corridor '{}': tranche {} has nonpositive limit", c.id, k + 1));
            }
            idx.tranche.push_back(
                lp.add_variable(fmt::format("inv[{},t{}]", c.id, k + 1), 0.0, c.tranches[k].limit_gw).index);
        }
        const auto from = sys_.region_index(c.from);
        const auto to = sys_.region_index(c.to);
        const double keep = 1.0 - c.loss();
        const auto carrier = c.carrier();
        idx.flow.resize(2);
        for (int dir = 0; dir < 2; ++dir) {
            const auto src = dir == 0 ? from : to;
            const auto dst = dir == 0 ? to : from;
            for (std::size_t b = 0; b < nb; ++b) {
                const auto col =
                    lp.add_variable(fmt::format("flow[{},{},{}]", c.id, dir == 0 ? "fwd" : "bwd", block_name(b)))
                        .index;
                idx.flow[static_cast<std::size_t>(dir)].push_back(col);
                add_balance_term(src, carrier, b, col, -1.0);
                add_balance_term(dst, carrier, b, col, keep);
            }
        }
        model_.corridors.push_back(std::move(idx));
    }

    for (const auto& route : sys_.limits.imports) {
        ImportIndex idx;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const auto& rid = regions[r].id;
            if (!route.regions.empty() &&
                std::find(route.regions.begin(), route.regions.end(), rid) == route.regions.end()) {
                continue;
            }
            idx.regions.push_back(r);
            std::vector<std::size_t> amount;
            for (std::size_t b = 0; b < nb; ++b) {
                amount.push_back(lp.add_variable(fmt::format("import[{},{},{}]", route.id, rid, block_name(b))).index);
                add_balance_term(r, route.carrier, b, amount.back(), 1.0);
            }
            idx.amount.push_back(std::move(amount));
        }
        for (const auto& rid : route.regions) {
            sys_.region_index(rid); // dangling region names are errors
        }
        model_.imports.push_back(std::move(idx));
    }
}

void LpBuilder::add_balance_constraints()
{
    const auto nr = sys_.regions.size();
    const auto nc = model_.balance_carriers.size();
    const auto nb = sys_.grid.n_blocks;
    std::vector<std::vector<std::vector<double>>> demand(
        nr, std::vector<std::vector<double>>(nc, std::vector<double>(nb, 0.0)));
    for (const auto& d : sys_.demands) {
        const auto r = sys_.region_index(d.region);
        const auto slot = carrier_slot(d.carrier);
        if (slot == kNone) {
            throw ValidationError(fmt::format("demand {}/{}: carrier is not balanced", d.region, d.carrier));
        }
        if (d.values.size() != nb) {
            throw ValidationError(fmt::format("demand {}/{}: {} values for {} blocks", d.region, d.carrier,
                                              d.values.size(), nb));
        }
        for (std::size_t b = 0; b < nb; ++b) {
            demand[r][slot][b] += d.values[b];
        }
    }
    model_.balance_rows.assign(nr, std::vector<std::vector<std::size_t>>(nc, std::vector<std::size_t>(nb, kNone)));
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& terms = balance_terms_[r][c][b];
                if (terms.empty() && demand[r][c][b] == 0.0) {
                    continue;
                }
                model_.balance_rows[r][c][b] = model_.lp.add_row(
                    fmt::format("balance[{},{},{}]", sys_.regions[r].id, model_.balance_carriers[c], block_name(b)),
                    Sense::GreaterEqual, demand[r][c][b], terms);
            }
        }
    }
    balance_terms_.clear();
}

void LpBuilder::add_conversion_capacity_constraints()
{
    const double h = sys_.grid.block_length_h;
    for (std::size_t t = 0; t < sys_.technologies.size(); ++t) {
        const auto& tech = sys_.technologies[t];
        const auto& idx = model_.conversion[t];
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            const auto& rid = sys_.regions[r].id;
            for (std::size_t b = 0; b < sys_.grid.n_blocks; ++b) {
                const double avail = sys_.availability(tech, rid, b);
                model_.lp.add_row(fmt::format("capacity[{},{},{}]", tech.id, rid, block_name(b)), Sense::LessEqual,
                                  0.0, {Term{idx.act[r][b], 1.0}, Term{idx.cap[r], -avail * h}});
            }
        }
    }
}

void LpBuilder::add_nuclear_cogeneration_constraints()
{
    const double h = sys_.grid.block_length_h;
    for (std::size_t t = 0; t < sys_.nuclear.size(); ++t) {
        const auto& n = sys_.nuclear[t];
        const auto& idx = model_.nuclear[t];
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            for (std::size_t b = 0; b < sys_.grid.n_blocks; ++b) {
                std::vector<Term> terms;
                const auto& gen = idx.gen[r][b];
                terms.push_back({gen[0], 1.0});
                for (std::size_t k = 1; k < gen.size(); ++k) {
                    terms.push_back({gen[k], 1.0 / n.heat_bonus});
                }
                terms.push_back({idx.cap[r], -n.capacity_factor * h});
                model_.lp.add_row(fmt::format("cogen[{},{},{}]", n.id(), sys_.regions[r].id, block_name(b)),
                                  Sense::LessEqual, 0.0, terms);
            }
        }
    }
}

void LpBuilder::add_storage_constraints()
{
    const double h = sys_.grid.block_length_h;
    const auto nb = sys_.grid.n_blocks;
    for (std::size_t s = 0; s < sys_.storage.size(); ++s) {
        const auto& st = sys_.storage[s];
        auto& idx = model_.storage[s];
        idx.level_rows.assign(sys_.regions.size(), {});
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            const auto& rid = sys_.regions[r].id;
            for (std::size_t b = 0; b < nb; ++b) {
                const auto next = (b + 1) % nb;
                std::vector<Term> terms{{idx.level[r][next], 1.0},
                                        {idx.charge[r][b], -st.charge_efficiency},
                                        {idx.discharge[r][b], 1.0 / st.discharge_efficiency}};
                if (next == b) {
                    terms[0].coef = st.self_discharge; // single-block horizon
                } else {
                    terms.push_back({idx.level[r][b], -(1.0 - st.self_discharge)});
                }
                idx.level_rows[r].push_back(model_.lp.add_row(
                    fmt::format("soc[{},{},{}]", st.id, rid, block_name(b)), Sense::Equal, 0.0, terms));
            }
            for (std::size_t b = 0; b < nb; ++b) {
                model_.lp.add_row(fmt::format("charge_cap[{},{},{}]", st.id, rid, block_name(b)), Sense::LessEqual,
                                  0.0, {Term{idx.charge[r][b], 1.0}, Term{idx.power_cap[r], -h}});
                model_.lp.add_row(fmt::format("discharge_cap[{},{},{}]", st.id, rid, block_name(b)),
                                  Sense::LessEqual, 0.0,
                                  {Term{idx.discharge[r][b], 1.0}, Term{idx.power_cap[r], -h}});
                model_.lp.add_row(fmt::format("level_cap[{},{},{}]", st.id, rid, block_name(b)), Sense::LessEqual,
                                  0.0, {Term{idx.level[r][b], 1.0}, Term{idx.energy_cap[r], -1.0}});
            }
        }
    }
}

void LpBuilder::add_transmission_expansion()
{
    const double h = sys_.grid.block_length_h;
    for (std::size_t c = 0; c < sys_.transmission.size(); ++c) {
        const auto& corr = sys_.transmission[c];
        const auto& idx = model_.corridors[c];
        for (std::size_t dir = 0; dir < 2; ++dir) {
            for (std::size_t b = 0; b < sys_.grid.n_blocks; ++b) {
                std::vector<Term> terms{{idx.flow[dir][b], 1.0}};
                for (const auto col : idx.tranche) {
                    terms.push_back({col, -h});
                }
                model_.lp.add_row(
                    fmt::format("transfer[{},{},{}]", corr.id, dir == 0 ? "fwd" : "bwd", block_name(b)),
                    Sense::LessEqual, corr.existing_gw * h, terms);
            }
        }
    }
}

void LpBuilder::add_resource_limits()
{
    const auto nb = sys_.grid.n_blocks;
    for (std::size_t t = 0; t < sys_.technologies.size(); ++t) {
        const auto& tech = sys_.technologies[t];
        if (!tech.potential_total_max) {
            continue;
        }
        std::vector<Term> terms;
        for (const auto col : model_.conversion[t].cap) {
            terms.push_back({col, 1.0});
        }
        model_.lp.add_row(fmt::format("potential_total[{}]", tech.id), Sense::LessEqual, *tech.potential_total_max,
                          terms);
    }

    if (sys_.limits.biomass_total_max_twh) {
        std::vector<Term> terms;
        for (std::size_t t = 0; t < sys_.technologies.size(); ++t) {
            const auto it = sys_.technologies[t].inputs.find("biomass");
            if (it == sys_.technologies[t].inputs.end()) {
                continue;
            }
            for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
                for (std::size_t b = 0; b < nb; ++b) {
                    terms.push_back({model_.conversion[t].act[r][b], it->second * sys_.grid.scale(b)});
                }
            }
        }
        model_.biomass_row = model_.lp.add_row("biomass_budget", Sense::LessEqual,
                                               *sys_.limits.biomass_total_max_twh * 1000.0, terms);
    }

    for (std::size_t k = 0; k < sys_.limits.imports.size(); ++k) {
        const auto& route = sys_.limits.imports[k];
        if (!route.max_twh) {
            continue;
        }
        std::vector<Term> terms;
        for (const auto& series : model_.imports[k].amount) {
            for (std::size_t b = 0; b < nb; ++b) {
                terms.push_back({series[b], sys_.grid.scale(b)});
            }
        }
        model_.lp.add_row(fmt::format("import_cap[{}]", route.id), Sense::LessEqual, *route.max_twh * 1000.0,
                          terms);
    }
}

void LpBuilder::build_objective()
{
    auto& lp = model_.lp;
    const auto nb = sys_.grid.n_blocks;
    for (std::size_t t = 0; t < sys_.technologies.size(); ++t) {
        const auto& tech = sys_.technologies[t];
        const auto& idx = model_.conversion[t];
        const double var = (tech.om_var + tech.fuel) * kPerMwh;
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            lp.set_cost(idx.cap[r], tech.annualized_capex);
            for (std::size_t b = 0; b < nb; ++b) {
                lp.set_cost(idx.act[r][b], var * sys_.grid.scale(b));
            }
        }
    }

    for (std::size_t t = 0; t < sys_.nuclear.size(); ++t) {
        const auto& n = sys_.nuclear[t];
        const auto& idx = model_.nuclear[t];
        if (!n.cost) {
            if (!n.excluded) {
                throw ValidationError(fmt::format("nuclear technology '{}' has no cost data", n.id()));
            }
            continue;
        }
        const auto& cost = *n.cost;
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            lp.set_cost(idx.cap[r], cost.annualized_capex);
            for (std::size_t b = 0; b < nb; ++b) {
                const double s = sys_.grid.scale(b);
                const auto& gen = idx.gen[r][b];
                // OM on every MWh of output, fuel on reactor load
                lp.set_cost(gen[0], (cost.om + cost.fuel) * kPerMwh * s);
                for (std::size_t k = 1; k < gen.size(); ++k) {
                    lp.set_cost(gen[k], (cost.om + cost.fuel / n.heat_bonus) * kPerMwh * s);
                }
            }
        }
    }

    for (std::size_t k = 0; k < sys_.storage.size(); ++k) {
        const auto& st = sys_.storage[k];
        const auto& idx = model_.storage[k];
        for (std::size_t r = 0; r < sys_.regions.size(); ++r) {
            lp.set_cost(idx.energy_cap[r], st.energy_capex);
            lp.set_cost(idx.power_cap[r], st.power_capex);
        }
    }

    const double annualize = network_annualization(sys_);
    for (std::size_t c = 0; c < sys_.transmission.size(); ++c) {
        const auto& corr = sys_.transmission[c];
        for (std::size_t k = 0; k < corr.tranches.size(); ++k) {
            lp.set_cost(model_.corridors[c].tranche[k], corr.tranches[k].capex_per_gw * annualize);
        }
    }

    for (std::size_t k = 0; k < sys_.limits.imports.size(); ++k) {
        const double price = sys_.limits.imports[k].price * kPerMwh;
        for (const auto& series : model_.imports[k].amount) {
            for (std::size_t b = 0; b < nb; ++b) {
                lp.set_cost(series[b], price * sys_.grid.scale(b));
            }
        }
    }
}

BuiltModel LpBuilder::take()
{
    return std::move(model_);
}

BuiltModel build_lp(const sys::EnergySystem& system)
{
    LpBuilder builder(system);
    builder.declare_variables();
    builder.add_balance_constraints();
    builder.add_conversion_capacity_constraints();
    builder.add_nuclear_cogeneration_constraints();
    builder.add_storage_constraints();
    builder.add_transmission_expansion();
    builder.add_resource_limits();
    builder.build_objective();
    return builder.take();
}

} // namespace atomgrid::lp_build
