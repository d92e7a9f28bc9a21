#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ggrf/data_model.hpp"
#include "ggrf/error.hpp"

namespace ggrf {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_whitespace(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_missing_token(const std::string& cell) {
    return cell == "NA" || cell == "." || cell == "nan" || cell == "NaN";
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return in;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

double parse_real(const std::string& cell, const std::string& context) {
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw InputError(context + ": cannot parse '" + cell + "' as a number");
    }
    return value;
}

}  // namespace

GenotypeMatrix read_genotypes_tsv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        header = split(line, '\t');
        break;
    }
    if (header.size() < 2) {
        throw InputError(where(source, line_no) + ": genotype header needs an id column and at "
                                                  "least one variant");
    }
    std::vector<std::string> variant_ids(header.begin() + 1, header.end());
    const std::size_t k = variant_ids.size();

    std::vector<std::string> subject_ids;
    std::vector<double> cells;
    bool any_real = false;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, '\t');
        if (fields.size() != k + 1) {
            throw InputError(where(source, line_no) + ": expected " + std::to_string(k + 1) +
                             " fields, found " + std::to_string(fields.size()));
        }
        subject_ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto& cell = fields[c];
            if (cell == "NA") {
                cells.push_back(kMissingDosage);
                continue;
            }
            const std::string context = where(source, line_no) + ", column " +
                                        std::to_string(c + 1) + " (" + variant_ids[c - 1] + ")";
            double d = 0.0;
            try {
                d = parse_real(cell, context);
            } catch (const InputError&) {
                throw InputError(context + ": invalid dosage '" + cell + "'");
            }
            if (!(d >= 0.0 && d <= 2.0)) {
                throw InputError(context + ": invalid dosage '" + cell + "'");
            }
            if (d != 0.0 && d != 1.0 && d != 2.0) any_real = true;
            cells.push_back(d);
        }
    }
    const auto n = static_cast<Eigen::Index>(subject_ids.size());
    Eigen::MatrixXd dosages(n, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
            dosages(i, j) = cells[static_cast<std::size_t>(i) * k + static_cast<std::size_t>(j)];
        }
    }
    return GenotypeMatrix(std::move(dosages), std::move(subject_ids), std::move(variant_ids),
                          any_real);
}

GenotypeMatrix load_genotypes_tsv(const std::string& path) {
    auto in = open_input(path);
    return read_genotypes_tsv(in, path);
}

void write_genotypes_tsv(const GenotypeMatrix& g, std::ostream& out) {
    out << "subject_id";
    for (const auto& id : g.variant_ids()) out << '\t' << id;
    out << '\n';
    const auto& d = g.dosages();
    for (Eigen::Index i = 0; i < g.n_subjects(); ++i) {
        out << g.subject_ids()[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < g.n_variants(); ++j) {
            out << '\t';
            if (is_missing(d(i, j))) {
                out << "NA";
            } else {
                out << std::setprecision(17) << d(i, j);
            }
        }
        out << '\n';
    }
}

void write_genotypes_tsv(const GenotypeMatrix& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_genotypes_tsv(g, out);
}

GenotypeMatrix read_vcf_dosages(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> samples;
    std::vector<std::string> variant_ids;
    std::vector<std::vector<double>> columns;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line.rfind("##", 0) == 0) continue;
        const auto fields = split(line, '\t');
        if (line[0] == '#') {
            if (fields.size() < 10 || fields[0] != "#CHROM" || fields[8] != "FORMAT") {
                throw InputError(where(source, line_no) +
                                 ": VCF header must list CHROM..FORMAT and at least one sample");
            }
            samples.assign(fields.begin() + 9, fields.end());
            header_seen = true;
            continue;
        }
        if (!header_seen) throw InputError(where(source, line_no) + ": record before #CHROM header");
        if (fields.size() != samples.size() + 9) {
            throw InputError(where(source, line_no) + ": expected " +
                             std::to_string(samples.size() + 9) + " fields, found " +
                             std::to_string(fields.size()));
        }
        const auto& alt = fields[4];
        if (alt.find(',') != std::string::npos || alt.find('<') != std::string::npos) {
            throw InputError(where(source, line_no) +
                             ": unsupported record (multiallelic or symbolic ALT '" + alt + "')");
        }
        const auto format = split(fields[8], ':');
        if (format.empty() || format[0] != "GT") {
            throw InputError(where(source, line_no) + ": unsupported record (FORMAT '" +
                             fields[8] + "' has no leading GT)");
        }
        std::vector<double> dosage;
        dosage.reserve(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const std::string gt = split(fields[9 + s], ':')[0];
            if (gt == "." || gt == "./." || gt == ".|.") {
                dosage.push_back(kMissingDosage);
                continue;
            }
            if (gt.size() != 3 || (gt[1] != '/' && gt[1] != '|')) {
                throw InputError(where(source, line_no) + ": unsupported genotype '" + gt +
                                 "' for sample " + samples[s]);
            }
            double d = 0.0;
            for (const char allele : {gt[0], gt[2]}) {
                if (allele == '1') {
                    d += 1.0;
                } else if (allele != '0') {
                    throw InputError(where(source, line_no) + ": unsupported genotype '" + gt +
                                     "' for sample " + samples[s]);
                }
            }
            dosage.push_back(d);
        }
        const std::string id = fields[2] != "." ? fields[2] : fields[0] + ":" + fields[1];
        variant_ids.push_back(id);
        columns.push_back(std::move(dosage));
    }
    if (!header_seen) throw InputError(source + ": no #CHROM header line");
    if (columns.empty()) throw InputError(source + ": no variant records");

    Eigen::MatrixXd dosages(static_cast<Eigen::Index>(samples.size()),
                            static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            dosages(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
        }
    }
    return GenotypeMatrix(std::move(dosages), std::move(samples), std::move(variant_ids));
}

GenotypeMatrix load_vcf_dosages(const std::string& path) {
    auto in = open_input(path);
    return read_vcf_dosages(in, path);
}

SubjectTable read_subject_table(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    SubjectTable table;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        const auto header = split(line, '\t');
        if (header.size() < 2) {
            throw InputError(where(source, line_no) + ": header needs an id column and at least "
                                                      "one named column");
        }
        table.columns.assign(header.begin() + 1, header.end());
        break;
    }
    if (table.columns.empty()) throw InputError(source + ": empty table");
    const std::size_t m = table.columns.size();
    std::vector<double> cells;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, '\t');
        if (fields.size() != m + 1) {
            throw InputError(where(source, line_no) + ": expected " + std::to_string(m + 1) +
                             " fields, found " + std::to_string(fields.size()));
        }
        table.subject_ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (is_missing_token(fields[c])) {
                cells.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                cells.push_back(parse_real(fields[c], where(source, line_no) + ", column '" +
                                                          table.columns[c - 1] + "'"));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(table.subject_ids.size());
    table.values.resize(n, static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
            table.values(i, j) = cells[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)];
        }
    }
    return table;
}

SubjectTable load_subject_table(const std::string& path) {
    auto in = open_input(path);
    return read_subject_table(in, path);
}

std::map<std::string, std::string> load_region_map(const std::string& path) {
    auto in = open_input(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_whitespace(line);
        if (fields.size() != 2) {
            throw InputError(where(path, line_no) + ": expected 'variant_id region_id'");
        }
        out[fields[0]] = fields[1];
    }
    return out;
}

}  // namespace ggrf
